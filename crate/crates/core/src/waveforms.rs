//! CP-OFDM, PCC-OFDM and UFMC transmitter and receiver chains.
//!
//! All chains share the transform convention of [`crate::numerics::Fft`]:
//! the transmitter applies the `1/N`-scaled inverse DFT, the receiver an
//! unscaled forward DFT, so a noiseless loopback returns `X_k` unchanged
//! (UFMC up to the per-subcarrier filter response).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::numerics::{chebyshev_filter, linear_convolve, Fft, ProtoFilter};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformKind {
    CpOfdm,
    PccOfdm,
    Ufmc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    pub kind: WaveformKind,
    /// FFT size.
    pub n: usize,
    /// Cyclic prefix length (CP-OFDM only).
    pub n_cp: usize,
    /// Subband filter length (UFMC only).
    pub filter_len: usize,
    /// PCC receiver weighting-and-adding; when off the receiver decides on
    /// the first subcarrier of each pair.
    pub pcc_weighting: bool,
    /// Optional cyclic prefix for PCC-OFDM.
    pub pcc_cp: usize,
    /// Dolph-Chebyshev sidelobe attenuation of the UFMC subband filters.
    pub sidelobe_db: f64,
}

impl WaveformConfig {
    pub fn cp_ofdm(n: usize, n_cp: usize) -> Self {
        WaveformConfig {
            kind: WaveformKind::CpOfdm,
            n,
            n_cp,
            filter_len: 1,
            pcc_weighting: true,
            pcc_cp: 0,
            sidelobe_db: 40.0,
        }
    }

    pub fn pcc_ofdm(n: usize, weighting: bool) -> Self {
        WaveformConfig { kind: WaveformKind::PccOfdm, pcc_weighting: weighting, ..Self::cp_ofdm(n, 0) }
    }

    pub fn ufmc(n: usize, filter_len: usize) -> Self {
        WaveformConfig { kind: WaveformKind::Ufmc, filter_len, ..Self::cp_ofdm(n, 0) }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 2 {
            return Err(Error::NotPowerOfTwo { what: "FFT", len: self.n });
        }
        if self.n_cp >= self.n || self.pcc_cp >= self.n {
            return Err(Error::InvalidConfig(format!(
                "cyclic prefix must be shorter than N={}",
                self.n
            )));
        }
        if self.filter_len.is_multiple_of(2) {
            return Err(Error::EvenFilterLength(self.filter_len));
        }
        if self.filter_len == 0 || self.filter_len > self.n {
            return Err(Error::InvalidConfig(format!(
                "filter length {} outside 1..={}",
                self.filter_len, self.n
            )));
        }
        if !(self.sidelobe_db > 0.0) {
            return Err(Error::InvalidConfig("sidelobe attenuation must be positive".into()));
        }
        Ok(())
    }

    /// Samples in front of the FFT body of each symbol.
    pub fn prefix_len(&self) -> usize {
        match self.kind {
            WaveformKind::CpOfdm => self.n_cp,
            WaveformKind::PccOfdm => self.pcc_cp,
            WaveformKind::Ufmc => 0,
        }
    }

    /// Samples occupied by one multicarrier symbol.
    pub fn symbol_span(&self) -> usize {
        match self.kind {
            WaveformKind::CpOfdm => self.n + self.n_cp,
            WaveformKind::PccOfdm => self.n + self.pcc_cp,
            WaveformKind::Ufmc => self.n + self.filter_len - 1,
        }
    }
}

/// Subcarriers given to one user: equal-size subbands at `start_indices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbandAllocation {
    pub subband_size: usize,
    pub start_indices: Vec<usize>,
    /// Unused subcarriers between this user's band and its neighbour
    /// (descriptive; the indices themselves are authoritative).
    pub guard: usize,
}

impl SubbandAllocation {
    pub fn new(subband_size: usize, start_indices: Vec<usize>, guard: usize) -> Self {
        SubbandAllocation { subband_size, start_indices, guard }
    }

    /// `count` adjacent subbands beginning at `first`.
    pub fn contiguous(first: usize, count: usize, subband_size: usize) -> Self {
        let starts = (0..count).map(|i| first + i * subband_size).collect();
        SubbandAllocation { subband_size, start_indices: starts, guard: 0 }
    }

    /// Allocated subcarrier indices in ascending order.
    pub fn subcarriers(&self) -> Vec<usize> {
        self.start_indices.iter().flat_map(|s| *s..*s + self.subband_size).collect()
    }

    pub fn count(&self) -> usize {
        self.subband_size * self.start_indices.len()
    }

    pub fn validate(&self, cfg: &WaveformConfig) -> Result<()> {
        if self.subband_size == 0 || self.start_indices.is_empty() {
            return Err(Error::InvalidConfig("allocation is empty".into()));
        }
        for pair in self.start_indices.windows(2) {
            if pair[1] < pair[0] + self.subband_size {
                return Err(Error::InvalidConfig(format!(
                    "subbands at {} and {} overlap or are unsorted",
                    pair[0], pair[1]
                )));
            }
        }
        let last = *self.start_indices.last().expect("non-empty");
        if last + self.subband_size > cfg.n {
            return Err(Error::InvalidConfig(format!(
                "subband at {last} runs past N={}",
                cfg.n
            )));
        }
        if cfg.kind == WaveformKind::PccOfdm
            && (!self.subband_size.is_multiple_of(2) || self.start_indices.iter().any(|s| s % 2 != 0))
        {
            return Err(Error::InvalidConfig(
                "PCC subbands need even size and even start indices".into(),
            ));
        }
        Ok(())
    }
}

/// `symbols x n` frequency-domain values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDomainFrame {
    n: usize,
    values: Vec<Complex64>,
}

impl FrequencyDomainFrame {
    pub fn zeros(symbols: usize, n: usize) -> Self {
        FrequencyDomainFrame { n, values: vec![ZERO; symbols * n] }
    }

    pub fn from_rows(n: usize, values: Vec<Complex64>) -> Result<Self> {
        if n == 0 || !values.len().is_multiple_of(n) {
            return Err(Error::InvalidConfig("frame is not a whole number of symbols".into()));
        }
        Ok(FrequencyDomainFrame { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symbols(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn symbol(&self, s: usize) -> &[Complex64] {
        &self.values[s * self.n..(s + 1) * self.n]
    }

    pub fn symbol_mut(&mut self, s: usize) -> &mut [Complex64] {
        &mut self.values[s * self.n..(s + 1) * self.n]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// PCC mapping of one symbol's data onto subcarrier pairs:
/// `X[2k'] = D[k']`, `X[2k'+1] = -D[k']`.
pub fn pcc_map(data: &[Complex64], alloc: &SubbandAllocation, n: usize) -> Result<Vec<Complex64>> {
    let subcarriers = alloc.subcarriers();
    if !subcarriers.len().is_multiple_of(2) {
        return Err(Error::InvalidConfig("PCC needs an even number of subcarriers".into()));
    }
    if data.len() != subcarriers.len() / 2 {
        return Err(Error::InvalidConfig(format!(
            "expected {} data symbols, got {}",
            subcarriers.len() / 2,
            data.len()
        )));
    }
    let mut row = vec![ZERO; n];
    for (d, pair) in data.iter().zip(subcarriers.chunks_exact(2)) {
        row[pair[0]] = *d;
        row[pair[1]] = -*d;
    }
    Ok(row)
}

/// PCC receiver combining. With weighting, `Z = (Y[2l'] - Y[2l'+1]) / 2`;
/// without, `Z = Y[2l']`.
pub fn pcc_combine(y: &[Complex64], alloc: &SubbandAllocation, weighting: bool) -> Vec<Complex64> {
    alloc
        .subcarriers()
        .chunks_exact(2)
        .map(|pair| if weighting { (y[pair[0]] - y[pair[1]]) * 0.5 } else { y[pair[0]] })
        .collect()
}

/// Deterministic one-tap receiver correction.
///
/// Symbol `s` on subcarrier `k` is divided by `subcarrier_gain[k] *
/// symbol_rotation^s`; after PCC combining (or subcarrier selection) each data
/// stream is divided by `stream_gain`, when present.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalizer {
    pub subcarrier_gain: Vec<Complex64>,
    pub symbol_rotation: Complex64,
    pub stream_gain: Option<Vec<Complex64>>,
}

impl Equalizer {
    pub fn identity(n: usize) -> Self {
        Equalizer { subcarrier_gain: vec![ONE; n], symbol_rotation: ONE, stream_gain: None }
    }

    pub fn from_gains(subcarrier_gain: Vec<Complex64>) -> Self {
        Equalizer { subcarrier_gain, symbol_rotation: ONE, stream_gain: None }
    }

    fn apply(&self, row: &mut [Complex64], symbol: usize) {
        let rot = if self.symbol_rotation == ONE { ONE } else { self.symbol_rotation.powi(symbol as i32) };
        for (y, g) in row.iter_mut().zip(&self.subcarrier_gain) {
            let gain = g * rot;
            if gain != ZERO {
                *y /= gain;
            }
        }
    }
}

/// A configured transmitter/receiver pair for one user's allocation.
#[derive(Debug, Clone)]
pub struct Transceiver {
    cfg: WaveformConfig,
    alloc: SubbandAllocation,
    subcarriers: Vec<usize>,
    fft: Fft,
    /// 2N-point plan for the UFMC receiver.
    fft2: Option<Fft>,
    /// One filter per subband (UFMC).
    filters: Vec<ProtoFilter>,
}

impl Transceiver {
    pub fn new(cfg: &WaveformConfig, alloc: &SubbandAllocation) -> Result<Self> {
        cfg.validate()?;
        alloc.validate(cfg)?;
        let fft = Fft::new(cfg.n)?;
        let (fft2, filters) = if cfg.kind == WaveformKind::Ufmc {
            let filters = alloc
                .start_indices
                .iter()
                .map(|s| {
                    let centre = (*s as f64 + (alloc.subband_size as f64 - 1.0) / 2.0) / cfg.n as f64;
                    chebyshev_filter(cfg.filter_len, cfg.sidelobe_db, centre - libm::floor(centre))
                })
                .collect::<Result<Vec<_>>>()?;
            (Some(Fft::new(2 * cfg.n)?), filters)
        } else {
            (None, Vec::new())
        };
        Ok(Transceiver {
            cfg: cfg.clone(),
            alloc: alloc.clone(),
            subcarriers: alloc.subcarriers(),
            fft,
            fft2,
            filters,
        })
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.cfg
    }

    pub fn allocation(&self) -> &SubbandAllocation {
        &self.alloc
    }

    pub fn subcarriers(&self) -> &[usize] {
        &self.subcarriers
    }

    /// Data symbols carried per multicarrier symbol.
    pub fn streams_per_symbol(&self) -> usize {
        match self.cfg.kind {
            WaveformKind::PccOfdm => self.subcarriers.len() / 2,
            _ => self.subcarriers.len(),
        }
    }

    pub fn frame_len(&self, symbols: usize) -> usize {
        symbols * self.cfg.symbol_span()
    }

    /// Places `data` (symbol-major, `streams_per_symbol` per symbol) onto
    /// subcarriers, applying the PCC pair mapping where relevant.
    pub fn build_frame(&self, data: &[Complex64]) -> Result<FrequencyDomainFrame> {
        let per = self.streams_per_symbol();
        if data.is_empty() || !data.len().is_multiple_of(per) {
            return Err(Error::InvalidConfig(format!(
                "data length {} is not a multiple of {per}",
                data.len()
            )));
        }
        let n = self.cfg.n;
        let mut frame = FrequencyDomainFrame::zeros(data.len() / per, n);
        for (s, chunk) in data.chunks_exact(per).enumerate() {
            let row = frame.symbol_mut(s);
            if self.cfg.kind == WaveformKind::PccOfdm {
                for (d, pair) in chunk.iter().zip(self.subcarriers.chunks_exact(2)) {
                    row[pair[0]] = *d;
                    row[pair[1]] = -*d;
                }
            } else {
                for (d, k) in chunk.iter().zip(&self.subcarriers) {
                    row[*k] = *d;
                }
            }
        }
        Ok(frame)
    }

    /// Time-domain samples for a frame, `symbols * symbol_span` long.
    pub fn transmit(&self, frame: &FrequencyDomainFrame) -> Vec<Complex64> {
        let n = self.cfg.n;
        let span = self.cfg.symbol_span();
        let mut out = Vec::with_capacity(frame.symbols() * span);
        let mut body = vec![ZERO; n];
        for s in 0..frame.symbols() {
            let row = frame.symbol(s);
            match self.cfg.kind {
                WaveformKind::CpOfdm | WaveformKind::PccOfdm => {
                    body.copy_from_slice(row);
                    self.fft.inverse(&mut body);
                    let cp = self.cfg.prefix_len();
                    out.extend_from_slice(&body[n - cp..]);
                    out.extend_from_slice(&body);
                }
                WaveformKind::Ufmc => {
                    let start = out.len();
                    out.resize(start + span, ZERO);
                    for (b, first) in self.alloc.start_indices.iter().enumerate() {
                        let band = *first..*first + self.alloc.subband_size;
                        if row[band.clone()].iter().all(|v| *v == ZERO) {
                            continue;
                        }
                        body.iter_mut().for_each(|v| *v = ZERO);
                        body[band.clone()].copy_from_slice(&row[band]);
                        self.fft.inverse(&mut body);
                        let filtered = linear_convolve(&body, self.filters[b].taps());
                        for (o, f) in out[start..].iter_mut().zip(&filtered) {
                            *o += f;
                        }
                    }
                }
            }
        }
        out
    }

    /// Per-subcarrier outputs `Y_k` for `symbols` symbols, after equalization.
    pub fn receive(
        &self,
        samples: &[Complex64],
        symbols: usize,
        eq: &Equalizer,
    ) -> Result<FrequencyDomainFrame> {
        let needed = self.frame_len(symbols);
        if samples.len() < needed {
            return Err(Error::InputTooShort { needed, got: samples.len() });
        }
        let n = self.cfg.n;
        let span = self.cfg.symbol_span();
        let mut frame = FrequencyDomainFrame::zeros(symbols, n);
        match self.cfg.kind {
            WaveformKind::CpOfdm | WaveformKind::PccOfdm => {
                let cp = self.cfg.prefix_len();
                for s in 0..symbols {
                    let row = frame.symbol_mut(s);
                    let start = s * span + cp;
                    row.copy_from_slice(&samples[start..start + n]);
                    self.fft.forward(row);
                    eq.apply(row, s);
                }
            }
            WaveformKind::Ufmc => {
                let fft2 = self.fft2.as_ref().expect("UFMC plan present");
                let mut buf = vec![ZERO; 2 * n];
                for s in 0..symbols {
                    buf.iter_mut().for_each(|v| *v = ZERO);
                    buf[..span].copy_from_slice(&samples[s * span..(s + 1) * span]);
                    fft2.forward(&mut buf);
                    let row = frame.symbol_mut(s);
                    for (k, y) in row.iter_mut().enumerate() {
                        *y = buf[2 * k];
                    }
                    eq.apply(row, s);
                }
            }
        }
        Ok(frame)
    }

    /// Data estimates from equalized subcarrier outputs.
    pub fn recover(&self, y: &FrequencyDomainFrame, eq: &Equalizer) -> Vec<Complex64> {
        let per = self.streams_per_symbol();
        let mut out = Vec::with_capacity(y.symbols() * per);
        for s in 0..y.symbols() {
            let row = y.symbol(s);
            let start = out.len();
            if self.cfg.kind == WaveformKind::PccOfdm {
                out.extend(pcc_combine(row, &self.alloc, self.cfg.pcc_weighting));
            } else {
                out.extend(self.subcarriers.iter().map(|k| row[*k]));
            }
            if let Some(g) = &eq.stream_gain {
                for (v, gain) in out[start..].iter_mut().zip(g) {
                    *v /= gain;
                }
            }
        }
        out
    }

    /// `receive` followed by `recover`.
    pub fn demodulate(
        &self,
        samples: &[Complex64],
        symbols: usize,
        eq: &Equalizer,
    ) -> Result<Vec<Complex64>> {
        Ok(self.recover(&self.receive(samples, symbols, eq)?, eq))
    }

    /// Noiseless, unimpaired gain of each subcarrier: the subband filter
    /// response for UFMC, unity otherwise.
    pub fn reference_gains(&self) -> Vec<Complex64> {
        let mut gains = vec![ONE; self.cfg.n];
        if self.cfg.kind == WaveformKind::Ufmc {
            for (b, first) in self.alloc.start_indices.iter().enumerate() {
                for k in *first..*first + self.alloc.subband_size {
                    gains[k] = self.filters[b].response(k as f64 / self.cfg.n as f64);
                }
            }
        }
        gains
    }
}

fn full_band(cfg: &WaveformConfig) -> SubbandAllocation {
    SubbandAllocation::new(cfg.n, alloc::vec![0], 0)
}

/// CP-OFDM transmitter: inverse DFT per symbol, cyclic prefix prepended.
pub fn tx_cp_ofdm(frame: &FrequencyDomainFrame, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    if cfg.kind != WaveformKind::CpOfdm {
        return Err(Error::InvalidConfig("tx_cp_ofdm needs a CP-OFDM config".into()));
    }
    Ok(Transceiver::new(cfg, &full_band(cfg))?.transmit(frame))
}

/// CP-OFDM receiver: drop the prefix, DFT, equalize.
pub fn rx_cp_ofdm(
    samples: &[Complex64],
    cfg: &WaveformConfig,
    symbols: usize,
    eq: &Equalizer,
) -> Result<FrequencyDomainFrame> {
    Transceiver::new(cfg, &full_band(cfg))?.receive(samples, symbols, eq)
}

/// PCC-OFDM transmitter for `data` laid out symbol-major.
pub fn tx_pcc_ofdm(
    data: &[Complex64],
    cfg: &WaveformConfig,
    alloc: &SubbandAllocation,
) -> Result<Vec<Complex64>> {
    if cfg.kind != WaveformKind::PccOfdm {
        return Err(Error::InvalidConfig("tx_pcc_ofdm needs a PCC-OFDM config".into()));
    }
    let trx = Transceiver::new(cfg, alloc)?;
    Ok(trx.transmit(&trx.build_frame(data)?))
}

/// PCC-OFDM receiver returning data estimates.
pub fn rx_pcc_ofdm(
    samples: &[Complex64],
    cfg: &WaveformConfig,
    alloc: &SubbandAllocation,
    symbols: usize,
    eq: &Equalizer,
) -> Result<Vec<Complex64>> {
    Transceiver::new(cfg, alloc)?.demodulate(samples, symbols, eq)
}

/// UFMC transmitter: each subband separately transformed and filtered.
pub fn tx_ufmc(
    frame: &FrequencyDomainFrame,
    cfg: &WaveformConfig,
    alloc: &SubbandAllocation,
) -> Result<Vec<Complex64>> {
    if cfg.kind != WaveformKind::Ufmc {
        return Err(Error::InvalidConfig("tx_ufmc needs a UFMC config".into()));
    }
    Ok(Transceiver::new(cfg, alloc)?.transmit(frame))
}

/// UFMC receiver: zero-pad to 2N, 2N-point DFT, keep even outputs, equalize.
pub fn rx_ufmc(
    samples: &[Complex64],
    cfg: &WaveformConfig,
    alloc: &SubbandAllocation,
    symbols: usize,
    eq: &Equalizer,
) -> Result<FrequencyDomainFrame> {
    Transceiver::new(cfg, alloc)?.receive(samples, symbols, eq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dft, SeededRng};
    use core::f64::consts::PI;

    fn random_data(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = SeededRng::new(seed, 0);
        (0..n).map(|_| rng.complex_gaussian(1.0)).collect()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn symbol_spans() {
        assert_eq!(WaveformConfig::cp_ofdm(256, 32).symbol_span(), 288);
        assert_eq!(WaveformConfig::pcc_ofdm(256, true).symbol_span(), 256);
        assert_eq!(WaveformConfig::ufmc(256, 33).symbol_span(), 288);
    }

    #[test]
    fn config_validation() {
        assert!(WaveformConfig::cp_ofdm(200, 32).validate().is_err());
        assert!(WaveformConfig::cp_ofdm(256, 256).validate().is_err());
        assert!(WaveformConfig::ufmc(256, 32).validate().is_err());
        assert!(WaveformConfig::ufmc(16, 33).validate().is_err());
        let pcc = WaveformConfig::pcc_ofdm(256, true);
        assert!(SubbandAllocation::new(12, vec![3], 0).validate(&pcc).is_err());
        assert!(SubbandAllocation::new(11, vec![4], 0).validate(&pcc).is_err());
        assert!(SubbandAllocation::new(12, vec![0, 6], 0).validate(&pcc).is_err());
        assert!(SubbandAllocation::new(12, vec![250], 0).validate(&pcc).is_err());
        assert!(SubbandAllocation::new(12, vec![0, 24], 12).validate(&pcc).is_ok());
    }

    #[test]
    fn pcc_pair_mapping() {
        let d = Complex64::new(0.3, -0.7);
        let row = pcc_map(&[d], &SubbandAllocation::new(2, vec![0], 0), 8).unwrap();
        assert_eq!(row[0], d);
        assert_eq!(row[1], -d);
        assert!(row[2..].iter().all(|v| *v == ZERO));
        let alloc = SubbandAllocation::new(12, vec![40], 0);
        let data = random_data(6, 1);
        let row = pcc_map(&data, &alloc, 256).unwrap();
        for p in (40..52).step_by(2) {
            assert_eq!(row[p] + row[p + 1], ZERO);
        }
        assert!(pcc_map(&data[..5], &alloc, 256).is_err());
        assert!(pcc_map(&data[..1], &SubbandAllocation::new(3, vec![0], 0), 8).is_err());
        // 12 subcarriers carry 6 data symbols
        let trx = Transceiver::new(&WaveformConfig::pcc_ofdm(256, true), &alloc).unwrap();
        assert_eq!(trx.streams_per_symbol(), 6);
    }

    #[test]
    fn pcc_combining() {
        let alloc = SubbandAllocation::new(2, vec![0], 0);
        let d = Complex64::new(1.5, 0.5);
        let y = [d, -d, ZERO, ZERO];
        assert_eq!(pcc_combine(&y, &alloc, true), vec![d]);
        let y = [d + 0.2, -d + 0.6, ZERO, ZERO];
        assert_eq!(pcc_combine(&y, &alloc, false), vec![d + 0.2]);
    }

    #[test]
    fn pcc_combining_halves_noise() {
        let mut rng = SeededRng::new(4, 4);
        let alloc = SubbandAllocation::new(2, vec![0], 0);
        let d = Complex64::new(0.7, 0.7);
        let trials = 200_000;
        let mut var = 0.0;
        for _ in 0..trials {
            let y = [d + rng.complex_gaussian(1.0), -d + rng.complex_gaussian(1.0)];
            var += (pcc_combine(&y, &alloc, true)[0] - d).norm_sqr();
        }
        let var = var / trials as f64;
        assert!((var - 0.5).abs() < 0.01, "combined noise variance {var}");
    }

    #[test]
    fn cp_ofdm_layout() {
        let cfg = WaveformConfig::cp_ofdm(4, 1);
        let frame = FrequencyDomainFrame::from_rows(4, random_data(4, 2)).unwrap();
        let x = tx_cp_ofdm(&frame, &cfg).unwrap();
        assert_eq!(x.len(), 5);
        assert_eq!(x[0], x[4]);
        let cfg = WaveformConfig::cp_ofdm(256, 32);
        let frame = FrequencyDomainFrame::zeros(10, 256);
        assert_eq!(tx_cp_ofdm(&frame, &cfg).unwrap().len(), 2880);
    }

    #[test]
    fn single_tone_has_constant_modulus() {
        let cfg = WaveformConfig::cp_ofdm(64, 8);
        let mut frame = FrequencyDomainFrame::zeros(1, 64);
        frame.symbol_mut(0)[5] = Complex64::new(2.0, 0.0);
        let x = tx_cp_ofdm(&frame, &cfg).unwrap();
        assert!(x.iter().all(|v| (v.norm() - 2.0 / 64.0).abs() < 1e-15));
    }

    #[test]
    fn cp_ofdm_timing_inside_prefix_is_a_phase_ramp() {
        let cfg = WaveformConfig::cp_ofdm(256, 32);
        let alloc = SubbandAllocation::contiguous(8, 20, 12);
        let trx = Transceiver::new(&cfg, &alloc).unwrap();
        let data = random_data(3 * trx.streams_per_symbol(), 3);
        let frame = trx.build_frame(&data).unwrap();
        let tx = trx.transmit(&frame);
        // receive window p samples early: the signal arrives p samples late
        let p = 13;
        let mut delayed = vec![ZERO; p];
        delayed.extend_from_slice(&tx[..tx.len() - p]);
        let gains = (0..256)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * (k * p) as f64 / 256.0))
            .collect();
        let y = trx.receive(&delayed, 3, &Equalizer::from_gains(gains)).unwrap();
        assert!(max_err(y.values(), frame.values()) < 1e-10);
    }

    #[test]
    fn noiseless_loopback_all_waveforms() {
        let alloc = SubbandAllocation::new(12, vec![10, 34, 100], 12);
        for cfg in [
            WaveformConfig::cp_ofdm(256, 32),
            WaveformConfig::pcc_ofdm(256, true),
            WaveformConfig::pcc_ofdm(256, false),
            WaveformConfig::ufmc(256, 33),
        ] {
            let trx = Transceiver::new(&cfg, &alloc).unwrap();
            let data = random_data(4 * trx.streams_per_symbol(), 5);
            let tx = trx.transmit(&trx.build_frame(&data).unwrap());
            assert_eq!(tx.len(), trx.frame_len(4));
            let eq = Equalizer::from_gains(trx.reference_gains());
            let out = trx.demodulate(&tx, 4, &eq).unwrap();
            assert!(max_err(&out, &data) < 1e-8, "{:?}", cfg.kind);
        }
    }

    #[test]
    fn ufmc_unit_filter_is_plain_ofdm() {
        let cfg = WaveformConfig::ufmc(64, 1);
        let alloc = SubbandAllocation::new(12, vec![4], 0);
        let trx = Transceiver::new(&cfg, &alloc).unwrap();
        let frame = trx.build_frame(&random_data(12, 6)).unwrap();
        let ufmc = trx.transmit(&frame);
        let ofdm = dft(frame.symbol(0), true).unwrap();
        assert!(max_err(&ufmc, &ofdm) < 1e-14);
    }

    #[test]
    fn ufmc_full_band_unit_filter_matches_n_point_dft() {
        let cfg = WaveformConfig::ufmc(32, 1);
        let alloc = SubbandAllocation::new(32, vec![0], 0);
        let trx = Transceiver::new(&cfg, &alloc).unwrap();
        let x = random_data(32, 7);
        let y = trx.receive(&x, 1, &Equalizer::identity(32)).unwrap();
        assert!(max_err(y.symbol(0), &dft(&x, false).unwrap()) < 1e-12);
    }

    #[test]
    fn ufmc_superposition_of_subbands() {
        let cfg = WaveformConfig::ufmc(256, 33);
        let both = SubbandAllocation::new(12, vec![20, 44], 12);
        let trx = Transceiver::new(&cfg, &both).unwrap();
        let data = random_data(24, 8);
        let full = trx.transmit(&trx.build_frame(&data).unwrap());
        let mut first = data.clone();
        first[12..].iter_mut().for_each(|v| *v = ZERO);
        let mut second = data.clone();
        second[..12].iter_mut().for_each(|v| *v = ZERO);
        let a = trx.transmit(&trx.build_frame(&first).unwrap());
        let b = trx.transmit(&trx.build_frame(&second).unwrap());
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!(max_err(&full, &sum) < 1e-14);
        assert_eq!(full.len(), 288);
    }

    #[test]
    fn ufmc_unallocated_outputs_carry_no_leakage() {
        let cfg = WaveformConfig::ufmc(256, 33);
        let alloc = SubbandAllocation::new(12, vec![60], 0);
        let trx = Transceiver::new(&cfg, &alloc).unwrap();
        let data: Vec<Complex64> = (0..12).map(|_| ONE).collect();
        let tx = trx.transmit(&trx.build_frame(&data).unwrap());
        let y = trx.receive(&tx, 1, &Equalizer::identity(256)).unwrap();
        let signal = (60..72).map(|k| y.symbol(0)[k].norm_sqr()).fold(f64::MAX, f64::min);
        let leak = (0..256)
            .filter(|k| !(60..72).contains(k))
            .map(|k| y.symbol(0)[k].norm_sqr())
            .fold(0.0, f64::max);
        assert!(10.0 * (leak / signal).log10() < -40.0);
    }

    #[test]
    fn pcc_pair_envelope() {
        let cfg = WaveformConfig::pcc_ofdm(256, true);
        let alloc = SubbandAllocation::new(2, vec![38], 0);
        let x = tx_pcc_ofdm(&[ONE], &cfg, &alloc).unwrap();
        assert_eq!(x.len(), 256);
        for (l, v) in x.iter().enumerate() {
            let expected = (2.0 * (1.0 - (2.0 * PI * l as f64 / 256.0).cos())).sqrt() / 256.0;
            assert!((v.norm() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn short_input_rejected() {
        let cfg = WaveformConfig::cp_ofdm(64, 8);
        let r = rx_cp_ofdm(&[ZERO; 100], &cfg, 2, &Equalizer::identity(64));
        assert_eq!(r, Err(Error::InputTooShort { needed: 144, got: 100 }));
    }

    #[test]
    fn wrong_kind_rejected() {
        let frame = FrequencyDomainFrame::zeros(1, 64);
        assert!(tx_cp_ofdm(&frame, &WaveformConfig::ufmc(64, 9)).is_err());
    }
}
