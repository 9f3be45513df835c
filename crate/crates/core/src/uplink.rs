//! Multiuser uplink channel: per-user timing and frequency offsets, received
//! power, and AWGN calibrated to the reference user's energy per bit.
//!
//! Timing convention: a positive `tau` means the user's signal reaches the
//! receiver `p = round(tau * N)` samples late, i.e. the receive window opens
//! `p` samples early relative to that user's symbols. For CP-OFDM this moves
//! the window into the cyclic prefix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::modem::Constellation;
use crate::numerics::{mean_power, SeededRng};
use crate::waveforms::{SubbandAllocation, WaveformConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UserScenario {
    pub alloc: SubbandAllocation,
    pub constellation: Constellation,
    /// Timing offset as a fraction of the N-sample symbol body.
    pub tau: f64,
    /// Frequency offset in subcarrier spacings.
    pub dft: f64,
    /// Received power relative to the reference user, dB.
    pub gain_db: f64,
}

impl UserScenario {
    pub fn new(alloc: SubbandAllocation, constellation: Constellation) -> Self {
        UserScenario { alloc, constellation, tau: 0.0, dft: 0.0, gain_db: 0.0 }
    }

    pub fn with_offsets(mut self, tau: f64, dft: f64) -> Self {
        self.tau = tau;
        self.dft = dft;
        self
    }

    pub fn with_gain_db(mut self, gain_db: f64) -> Self {
        self.gain_db = gain_db;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.abs() <= 0.5) {
            return Err(Error::InvalidConfig(format!("|tau| = {} exceeds 0.5", self.tau)));
        }
        if !(self.dft.abs() <= 2.0) {
            return Err(Error::InvalidConfig(format!("|dfT| = {} exceeds 2", self.dft)));
        }
        if !self.gain_db.is_finite() {
            return Err(Error::InvalidConfig("gain must be finite".into()));
        }
        Ok(())
    }

    /// Integer sample shift applied for this user on an N-point system.
    pub fn shift(&self, n: usize) -> isize {
        timing_shift(self.tau, n)
    }
}

/// Offsets actually applied to one user's stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedOffset {
    pub shift: isize,
    pub dft: f64,
    pub theta0: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput {
    pub samples: Vec<Complex64>,
    /// Complex noise variance per sample.
    pub n0: f64,
    pub applied: Vec<AppliedOffset>,
}

pub fn timing_shift(tau: f64, n: usize) -> isize {
    (tau * n as f64).round() as isize
}

/// Delays (positive `tau`) or advances the stream by `round(tau * N)`
/// samples, keeping its length: samples pushed past either end are dropped
/// and the vacated end is zero-filled.
pub fn apply_timing_offset(x: &[Complex64], tau: f64, n: usize) -> Vec<Complex64> {
    shift_samples(x, timing_shift(tau, n))
}

pub fn shift_samples(x: &[Complex64], shift: isize) -> Vec<Complex64> {
    let len = x.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let s = shift.unsigned_abs().min(len);
    if shift >= 0 {
        out[s..].copy_from_slice(&x[..len - s]);
    } else {
        out[..len - s].copy_from_slice(&x[s..]);
    }
    out
}

/// Rotates sample `n` by `exp(j(2π dfT n / N + θ0))`; `n` counts from the
/// start of the stream, so the phase runs on across symbol boundaries.
pub fn apply_cfo(x: &[Complex64], dft: f64, n: usize, theta0: f64) -> Vec<Complex64> {
    let mut out = x.to_vec();
    rotate_in_place(&mut out, dft, n, theta0);
    out
}

fn rotate_in_place(x: &mut [Complex64], dft: f64, n: usize, theta0: f64) {
    if dft == 0.0 && theta0 == 0.0 {
        return;
    }
    let step = 2.0 * PI * dft / n as f64;
    for (i, v) in x.iter_mut().enumerate() {
        let phase = step * i as f64 + theta0;
        *v *= Complex64::new(phase.cos(), phase.sin());
    }
}

/// Delay, carrier offset and amplitude for one user, in channel order.
pub fn impair(x: &[Complex64], user: &UserScenario, n: usize) -> Vec<Complex64> {
    let mut y = shift_samples(x, user.shift(n));
    rotate_in_place(&mut y, user.dft, n, 0.0);
    let amp = libm::pow(10.0, user.gain_db / 20.0);
    if amp != 1.0 {
        y.iter_mut().for_each(|v| *v *= amp);
    }
    y
}

/// Bits per multicarrier symbol used to define Eb for the reference user.
///
/// Every occupied subcarrier counts its constellation's bits. For PCC-OFDM
/// this makes Eb the energy per bit on one subcarrier of each pair, so the
/// receiver's pair combining shows up as the 3 dB advantage over CP-OFDM.
pub fn energy_reference_bits(alloc: &SubbandAllocation, constellation: &Constellation) -> usize {
    alloc.count() * constellation.bits_per_symbol()
}

/// Noise variance per sample for a given Eb/N0 (dB).
pub fn noise_variance(power_per_sample: f64, span: usize, bits_per_symbol: usize, ebn0_db: f64) -> f64 {
    if ebn0_db == f64::INFINITY {
        return 0.0;
    }
    power_per_sample * span as f64 / (bits_per_symbol as f64 * libm::pow(10.0, ebn0_db / 10.0))
}

/// Sums the users' impaired streams and adds AWGN.
///
/// `streams[i]` is user `i`'s transmitted samples (all the same length). The
/// noise level follows from the reference user's measured received power.
/// With more than one user the reference must be synchronized; a lone user
/// may carry offsets, which then model a misaligned receiver.
pub fn compose_uplink(
    cfg: &WaveformConfig,
    users: &[UserScenario],
    streams: &[Vec<Complex64>],
    ebn0_db: f64,
    ref_user: usize,
    rng: &mut SeededRng,
) -> Result<ChannelOutput> {
    if users.is_empty() || users.len() != streams.len() {
        return Err(Error::InvalidConfig("one stream per user is required".into()));
    }
    if ref_user >= users.len() {
        return Err(Error::InvalidConfig(format!("reference user {ref_user} does not exist")));
    }
    let len = streams[0].len();
    if streams.iter().any(|s| s.len() != len) {
        return Err(Error::InvalidConfig("user streams differ in length (mismatched N or waveform)".into()));
    }
    if !len.is_multiple_of(cfg.symbol_span()) {
        return Err(Error::InvalidConfig("stream is not a whole number of symbols".into()));
    }
    for u in users {
        u.validate()?;
        u.alloc.validate(cfg)?;
    }
    let reference = &users[ref_user];
    if users.len() > 1 && (reference.tau != 0.0 || reference.dft != 0.0) {
        return Err(Error::InvalidConfig("the reference user must be synchronized".into()));
    }
    let n = cfg.n;
    let mut samples = vec![Complex64::new(0.0, 0.0); len];
    let mut applied = Vec::with_capacity(users.len());
    for (u, x) in users.iter().zip(streams) {
        let y = impair(x, u, n);
        for (s, v) in samples.iter_mut().zip(&y) {
            *s += v;
        }
        applied.push(AppliedOffset {
            shift: u.shift(n),
            dft: u.dft,
            theta0: 0.0,
            amplitude: libm::pow(10.0, u.gain_db / 20.0),
        });
    }
    let ref_power = mean_power(&streams[ref_user]) * libm::pow(10.0, reference.gain_db / 10.0);
    let bits = energy_reference_bits(&reference.alloc, &reference.constellation);
    let n0 = noise_variance(ref_power, cfg.symbol_span(), bits, ebn0_db);
    if n0 > 0.0 {
        for s in samples.iter_mut() {
            *s += rng.complex_gaussian(n0);
        }
    }
    Ok(ChannelOutput { samples, n0, applied })
}
