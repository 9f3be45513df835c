//! One Monte-Carlo frame of the uplink: random data for every user, the
//! composed channel, and the measured user's receiver with a genie equalizer.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::modem::{qam_demap, qam_map};
use crate::numerics::{substream, SeededRng};
use crate::uplink::{compose_uplink, impair, UserScenario};
use crate::waveforms::{Equalizer, FrequencyDomainFrame, Transceiver, WaveformConfig, WaveformKind};
use crate::{Error, Result};

const NOISE_ROLE: u64 = u64::MAX;

/// Error and bit counts from one or more frames.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCount {
    pub bit_errors: u64,
    pub bits: u64,
}

impl ErrorCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

impl core::ops::Add for ErrorCount {
    type Output = ErrorCount;
    fn add(self, o: ErrorCount) -> ErrorCount {
        ErrorCount { bit_errors: self.bit_errors + o.bit_errors, bits: self.bits + o.bits }
    }
}

impl core::iter::Sum for ErrorCount {
    fn sum<I: Iterator<Item = ErrorCount>>(iter: I) -> Self {
        iter.fold(ErrorCount::default(), |a, b| a + b)
    }
}

/// Everything needed to simulate frames of one scenario. Immutable once
/// built, so frames can be run from several threads.
#[derive(Debug, Clone)]
pub struct LinkSetup {
    cfg: WaveformConfig,
    users: Vec<UserScenario>,
    transceivers: Vec<Transceiver>,
    measured: usize,
    reference: usize,
    frame_symbols: usize,
    equalizer: Equalizer,
}

impl LinkSetup {
    /// `measured` is the user whose bits are counted; it also defines Eb.
    pub fn new(
        cfg: &WaveformConfig,
        users: Vec<UserScenario>,
        measured: usize,
        frame_symbols: usize,
    ) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::InvalidConfig("scenario has no users".into()));
        }
        if measured >= users.len() {
            return Err(Error::InvalidConfig(format!("measured user {measured} does not exist")));
        }
        if frame_symbols < 3 {
            return Err(Error::InvalidConfig("frames need at least 3 symbols".into()));
        }
        let transceivers = users
            .iter()
            .map(|u| {
                u.validate()?;
                Transceiver::new(cfg, &u.alloc)
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in users.iter().enumerate() {
            for b in users.iter().skip(i + 1) {
                let sa = a.alloc.subcarriers();
                if b.alloc.subcarriers().iter().any(|k| sa.contains(k)) {
                    return Err(Error::InvalidConfig("user allocations overlap".into()));
                }
            }
        }
        if users.len() > 1 {
            let m = &users[measured];
            if m.tau != 0.0 || m.dft != 0.0 {
                return Err(Error::InvalidConfig(
                    "the receiver is synchronized to the measured user".into(),
                ));
            }
        }
        let equalizer = genie_equalizer(cfg, &transceivers[measured], &users[measured]);
        Ok(LinkSetup {
            cfg: cfg.clone(),
            users,
            transceivers,
            measured,
            reference: measured,
            frame_symbols,
            equalizer,
        })
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.cfg
    }

    pub fn users(&self) -> &[UserScenario] {
        &self.users
    }

    pub fn equalizer(&self) -> &Equalizer {
        &self.equalizer
    }

    /// Measured-user bits counted per frame (first and last symbol excluded).
    pub fn bits_per_frame(&self) -> u64 {
        let trx = &self.transceivers[self.measured];
        let k = self.users[self.measured].constellation.bits_per_symbol();
        ((self.frame_symbols - 2) * trx.streams_per_symbol() * k) as u64
    }

    /// Simulates frame number `trial`. The outcome depends only on
    /// `(seed, trial, ebn0_db)`; data and noise draws do not depend on the
    /// Eb/N0 value, so curves share common random numbers.
    pub fn run_frame(&self, ebn0_db: f64, seed: u64, trial: u64) -> Result<ErrorCount> {
        let s = self.frame_symbols;
        let mut streams = Vec::with_capacity(self.users.len());
        let mut measured_bits = Vec::new();
        for (i, (u, trx)) in self.users.iter().zip(&self.transceivers).enumerate() {
            let mut rng = SeededRng::new(seed, substream(&[trial, i as u64]));
            let n_bits = s * trx.streams_per_symbol() * u.constellation.bits_per_symbol();
            let bits: Vec<u8> = (0..n_bits).map(|_| rng.bit()).collect();
            let symbols = qam_map(&bits, &u.constellation)?;
            streams.push(trx.transmit(&trx.build_frame(&symbols)?));
            if i == self.measured {
                measured_bits = bits;
            }
        }
        let mut noise = SeededRng::new(seed, substream(&[trial, NOISE_ROLE]));
        let rx = compose_uplink(&self.cfg, &self.users, &streams, ebn0_db, self.reference, &mut noise)?;
        let trx = &self.transceivers[self.measured];
        let estimates = trx.demodulate(&rx.samples, s, &self.equalizer)?;
        let decided = qam_demap(&estimates, &self.users[self.measured].constellation);
        let per_symbol = decided.len() / s;
        let interior = per_symbol..(s - 1) * per_symbol;
        let bit_errors = decided[interior.clone()]
            .iter()
            .zip(&measured_bits[interior.clone()])
            .filter(|(a, b)| a != b)
            .count() as u64;
        Ok(ErrorCount { bit_errors, bits: interior.len() as u64 })
    }
}

/// Ideal one-tap equalizer for `user`'s own deterministic channel.
///
/// Each allocated subcarrier is probed alone through the user's transmitter,
/// its timing and carrier offset, and the receiver; the complex output is
/// that subcarrier's gain (received amplitude, phase ramp, window loss,
/// filter response and the mean carrier phase over the window). A carrier
/// offset adds a further rotation of `2π dfT span / N` per symbol.
///
/// PCC pairs are combined as received and the tap is applied per subchannel
/// instead: correcting each subcarrier's timing phase ramp before combining
/// would undo the receive window formed by weighting-and-adding.
pub fn genie_equalizer(cfg: &WaveformConfig, trx: &Transceiver, user: &UserScenario) -> Equalizer {
    let n = cfg.n;
    let span = cfg.symbol_span();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let rotation = Complex64::from_polar(1.0, 2.0 * PI * user.dft * span as f64 / n as f64);
    let mut eq = Equalizer { subcarrier_gain: vec![one; n], symbol_rotation: rotation, stream_gain: None };
    if cfg.kind == WaveformKind::PccOfdm {
        let streams = trx.streams_per_symbol();
        let mut post = Vec::with_capacity(streams);
        for j in 0..streams {
            let mut data = vec![zero; streams];
            data[j] = one;
            let frame = trx.build_frame(&data).expect("one symbol of probe data");
            let rx = impair(&trx.transmit(&frame), user, n);
            let z = trx.demodulate(&rx, 1, &eq).expect("probe frame has one full symbol");
            post.push(if z[j] == zero { one } else { z[j] });
        }
        eq.stream_gain = Some(post);
        return eq;
    }
    let identity = Equalizer::identity(n);
    for &k in trx.subcarriers() {
        let mut frame = FrequencyDomainFrame::zeros(1, n);
        frame.symbol_mut(0)[k] = one;
        let rx = impair(&trx.transmit(&frame), user, n);
        let y = trx.receive(&rx, 1, &identity).expect("probe frame has one full symbol");
        let g = y.symbol(0)[k];
        eq.subcarrier_gain[k] = if g == zero { one } else { g };
    }
    eq
}
