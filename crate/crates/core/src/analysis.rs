//! Interference matrices for time and frequency offsets, PCC subchannel
//! interference, spectra and time-domain envelopes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::modem::Constellation;
use crate::numerics::{welch_psd, SeededRng};
use crate::waveforms::{SubbandAllocation, Transceiver, WaveformConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffsetDomain {
    Time,
    Freq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixVariant {
    Plain,
    PccNoWeight,
    PccWeight,
}

/// `size x size` matrix; entry `(l, k)` is the output on `l` for a unit input
/// on `k`. Complex values are kept so PCC combining can be done on them.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMatrix {
    size: usize,
    values: Vec<Complex64>,
    pub offset: f64,
    pub domain: OffsetDomain,
    pub variant: MatrixVariant,
}

impl InterferenceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn value(&self, l: usize, k: usize) -> Complex64 {
        self.values[l * self.size + k]
    }

    pub fn magnitude(&self, l: usize, k: usize) -> f64 {
        self.value(l, k).norm()
    }

    /// Row-major magnitudes.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Power on every output other than `k` for a unit input on `k`.
    pub fn off_diagonal_power(&self, k: usize) -> f64 {
        (0..self.size).filter(|l| *l != k).map(|l| self.value(l, k).norm_sqr()).sum()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..self.size {
            for k in 0..self.size {
                if l != k {
                    worst = worst.max(self.magnitude(l, k));
                }
            }
        }
        worst
    }
}

fn expj(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// `sum_{n=0}^{m-1} exp(j2π n x / N)` by the geometric series.
fn geometric(x: f64, m: usize, n: usize) -> Complex64 {
    let ratio = expj(2.0 * PI * x / n as f64);
    if (ratio - Complex64::new(1.0, 0.0)).norm() < 1e-14 {
        return Complex64::new(m as f64, 0.0);
    }
    (Complex64::new(1.0, 0.0) - expj(2.0 * PI * x * m as f64 / n as f64)) / (Complex64::new(1.0, 0.0) - ratio)
}

/// ICI for a receive window displaced by `p` samples, ignoring ISI:
/// `Y_{l,k} = (1/N) e^{j2πkp/N} sum_{n=0}^{N-1-p} e^{j2πn(k-l)/N}`.
pub fn ici_time(n: usize, p: usize) -> Result<InterferenceMatrix> {
    if n == 0 {
        return Err(Error::InvalidConfig("N must be positive".into()));
    }
    if p >= n {
        return Err(Error::InvalidConfig("time offset p must be below N".into()));
    }
    let m = n - p;
    // the sum depends on (k - l) mod N only
    let kernel: Vec<Complex64> = (0..n).map(|d| geometric(d as f64, m, n)).collect();
    let mut values = Vec::with_capacity(n * n);
    for l in 0..n {
        for k in 0..n {
            let d = (k + n - l) % n;
            let phase = expj(2.0 * PI * ((k * p) % n) as f64 / n as f64);
            values.push(phase * kernel[d] / n as f64);
        }
    }
    Ok(InterferenceMatrix {
        size: n,
        values,
        offset: p as f64,
        domain: OffsetDomain::Time,
        variant: MatrixVariant::Plain,
    })
}

/// ICI for a carrier offset of `dft` subcarrier spacings:
/// `Y_{l,k} = (1/N) e^{jθ0} sum_{n=0}^{N-1} e^{j2πn(k-l+dfT)/N}`.
pub fn ici_freq(n: usize, dft: f64, theta0: f64) -> Result<InterferenceMatrix> {
    if n == 0 {
        return Err(Error::InvalidConfig("N must be positive".into()));
    }
    let rot = expj(theta0);
    let kernel: Vec<Complex64> =
        (0..n).map(|d| rot * geometric(d as f64 + dft, n, n) / n as f64).collect();
    let mut values = Vec::with_capacity(n * n);
    for l in 0..n {
        for k in 0..n {
            values.push(kernel[(k + n - l) % n]);
        }
    }
    Ok(InterferenceMatrix {
        size: n,
        values,
        offset: dft,
        domain: OffsetDomain::Freq,
        variant: MatrixVariant::Plain,
    })
}

/// Subchannel interference for PCC: data `D_k'` enters as `+1` on `2k'` and
/// `-1` on `2k'+1`; outputs are `(Y_{2l'} - Y_{2l'+1})/2` with weighting,
/// `Y_{2l'}` without.
pub fn ischi(plain: &InterferenceMatrix, weighting: bool) -> Result<InterferenceMatrix> {
    if plain.variant != MatrixVariant::Plain {
        return Err(Error::InvalidConfig("ISCHI is derived from a plain ICI matrix".into()));
    }
    if !plain.size.is_multiple_of(2) {
        return Err(Error::InvalidConfig("ISCHI needs even N".into()));
    }
    let half = plain.size / 2;
    let column = |l: usize, kp: usize| plain.value(l, 2 * kp) - plain.value(l, 2 * kp + 1);
    let mut values = Vec::with_capacity(half * half);
    for lp in 0..half {
        for kp in 0..half {
            let z = if weighting {
                (column(2 * lp, kp) - column(2 * lp + 1, kp)) * 0.5
            } else {
                column(2 * lp, kp)
            };
            values.push(z);
        }
    }
    Ok(InterferenceMatrix {
        size: half,
        values,
        offset: plain.offset,
        domain: plain.domain,
        variant: if weighting { MatrixVariant::PccWeight } else { MatrixVariant::PccNoWeight },
    })
}

/// Magnitude of the PCC pair window, `sqrt(2(1 - cos(2πl/N)))`.
pub fn envelope_pcc(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidConfig("N must be at least 2".into()));
    }
    Ok((0..n)
        .map(|l| (2.0 * (1.0 - (2.0 * PI * l as f64 / n as f64).cos())).max(0.0).sqrt())
        .collect())
}

fn random_qpsk(count: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    let c = Constellation::qam4();
    (0..count).map(|_| c.points()[(rng.next_u64() >> 62) as usize]).collect()
}

/// Spectrum on an axis in subcarrier spacings, `[-N/2, N/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub freq: Vec<f64>,
    /// Peak-normalized, dB.
    pub psd_db: Vec<f64>,
}

/// Welch spectrum of a random-data transmit stream (Hann window, segments
/// of 4N samples, 50% overlap).
pub fn psd_estimate(
    cfg: &WaveformConfig,
    alloc: &SubbandAllocation,
    num_symbols: usize,
    rng: &mut SeededRng,
) -> Result<PsdEstimate> {
    if num_symbols < 100 {
        return Err(Error::InvalidConfig("PSD estimation needs at least 100 symbols".into()));
    }
    let trx = Transceiver::new(cfg, alloc)?;
    let data = random_qpsk(num_symbols * trx.streams_per_symbol(), rng);
    let x = trx.transmit(&trx.build_frame(&data)?);
    let seg = 4 * cfg.n;
    let raw = welch_psd(&x, seg, seg / 2)?;
    let peak = raw.iter().copied().fold(0.0, f64::max);
    let per_subcarrier = cfg.n as f64 / seg as f64;
    let mut freq = Vec::with_capacity(seg);
    let mut psd_db = Vec::with_capacity(seg);
    for j in (seg / 2..seg).chain(0..seg / 2) {
        let bin = if j >= seg / 2 { j as f64 - seg as f64 } else { j as f64 };
        freq.push(bin * per_subcarrier);
        psd_db.push(10.0 * (raw[j] / peak).max(1e-300).log10());
    }
    Ok(PsdEstimate { freq, psd_db })
}

/// Out-of-band roll-off in dB/decade.
///
/// Fits `psd_db` against `log10(f - reference)` over `span = (lo, hi)`
/// (offsets above `reference`, in subcarrier spacings), using only local
/// maxima so spectral nulls do not bias the fit.
pub fn oob_slope(psd: &PsdEstimate, reference: f64, span: (f64, f64)) -> Result<f64> {
    let (lo, hi) = span;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidConfig("fit span must satisfy 0 < lo < hi".into()));
    }
    let v = &psd.psd_db;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        let d = psd.freq[i] - reference;
        if d < lo || d > hi {
            continue;
        }
        if v[i] >= v[i - 1] && v[i] >= v[i + 1] {
            xs.push(d.log10());
            ys.push(v[i]);
        }
    }
    if xs.len() < 8 {
        return Err(Error::FitRegion { points: xs.len() });
    }
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// RMS magnitude at each sample position of a symbol over `num_symbols`
/// random-data symbols, normalized to a peak of 1. Length is the symbol span.
pub fn time_envelope(
    cfg: &WaveformConfig,
    alloc: &SubbandAllocation,
    num_symbols: usize,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    if num_symbols == 0 {
        return Err(Error::InvalidConfig("need at least one symbol".into()));
    }
    let trx = Transceiver::new(cfg, alloc)?;
    let data = random_qpsk(num_symbols * trx.streams_per_symbol(), rng);
    let x = trx.transmit(&trx.build_frame(&data)?);
    let span = cfg.symbol_span();
    let mut acc = vec![0.0; span];
    for symbol in x.chunks_exact(span) {
        for (a, v) in acc.iter_mut().zip(symbol) {
            *a += v.norm_sqr();
        }
    }
    let env: Vec<f64> = acc.iter().map(|a| (a / num_symbols as f64).sqrt()).collect();
    let peak = env.iter().copied().fold(0.0, f64::max);
    Ok(env.into_iter().map(|e| if peak > 0.0 { e / peak } else { 0.0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dft;

    /// Unit input on subcarrier k, displaced window or rotated samples, DFT.
    fn brute_force_column(n: usize, k: usize, p: usize, dft_off: f64) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[k] = Complex64::new(1.0, 0.0);
        let body = dft(&x, true).unwrap();
        let window: Vec<Complex64> = (0..n)
            .map(|i| {
                if i + p < n {
                    body[i + p] * expj(2.0 * PI * dft_off * i as f64 / n as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        dft(&window, false).unwrap()
    }

    #[test]
    fn closed_forms_match_brute_force() {
        for n in [16usize, 64, 256] {
            for p in [0usize, 1, 5, 13] {
                let m = ici_time(n, p).unwrap();
                for k in [0, 1, n / 2 - 1, n - 1] {
                    let col = brute_force_column(n, k, p, 0.0);
                    for l in 0..n {
                        assert!((m.value(l, k) - col[l]).norm() < 1e-10, "n={n} p={p} l={l} k={k}");
                    }
                }
            }
            for f in [0.0, 0.05, 0.5, 1.0] {
                let m = ici_freq(n, f, 0.0).unwrap();
                for k in [0, 3, n - 1] {
                    let col = brute_force_column(n, k, 0, f);
                    for l in 0..n {
                        assert!((m.value(l, k) - col[l]).norm() < 1e-10, "n={n} f={f}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_offset_is_identity() {
        let t = ici_time(64, 0).unwrap();
        let f = ici_freq(64, 0.0, 0.3).unwrap();
        for l in 0..64 {
            for k in 0..64 {
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((t.magnitude(l, k) - want).abs() < 1e-12);
                assert!((f.magnitude(l, k) - want).abs() < 1e-12);
            }
        }
        let w = ischi(&t, true).unwrap();
        assert_eq!(w.size(), 32);
        assert!(w.max_off_diagonal() < 1e-12);
        assert!((0..32).all(|k| (w.magnitude(k, k) - 1.0).abs() < 1e-12));
        let u = ischi(&f, false).unwrap();
        assert!(u.max_off_diagonal() < 1e-12);
    }

    #[test]
    fn time_diagonal_and_energy() {
        let n = 256;
        for p in [0, 1, 13, 100] {
            let m = ici_time(n, p).unwrap();
            for k in [0, 17, 255] {
                assert!((m.magnitude(k, k) - (n - p) as f64 / n as f64).abs() < 1e-12);
                let energy: f64 = (0..n).map(|l| m.value(l, k).norm_sqr()).sum();
                assert!((energy - (n - p) as f64 / n as f64).abs() < 1e-10);
                if p > 0 {
                    assert!(energy < 1.0);
                }
            }
        }
    }

    #[test]
    fn constant_diagonals() {
        let n = 64;
        for m in [ici_time(n, 5).unwrap(), ici_freq(n, 0.3, 0.0).unwrap()] {
            for d in 0..n {
                let first = m.magnitude(0, d);
                for l in 1..n {
                    assert!((m.magnitude(l, (l + d) % n) - first).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unit_frequency_offset_is_a_shift() {
        let m = ici_freq(32, 1.0, 0.0).unwrap();
        for k in 0..32 {
            for l in 0..32 {
                let want = if l == (k + 1) % 32 { 1.0 } else { 0.0 };
                assert!((m.magnitude(l, k) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_bin_offset_diagonal() {
        let n = 256;
        let m = ici_freq(n, 0.5, 0.0).unwrap();
        let expected = ((PI / 2.0).sin() / (n as f64 * (PI / (2.0 * n as f64)).sin())).abs();
        assert!((m.magnitude(7, 7) - expected).abs() < 1e-12);
        assert!((expected - 2.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn pcc_interference_is_much_lower() {
        let plain = ici_time(256, 13).unwrap();
        let weighted = ischi(&plain, true).unwrap();
        let unweighted = ischi(&plain, false).unwrap();
        assert!(weighted.max_off_diagonal() < 0.1 * plain.max_off_diagonal());
        for plain in [plain, ici_freq(256, 0.05, 0.0).unwrap()] {
            let w = ischi(&plain, true).unwrap();
            let u = ischi(&plain, false).unwrap();
            let pw: f64 = (0..128).map(|k| w.off_diagonal_power(k)).sum();
            let pu: f64 = (0..128).map(|k| u.off_diagonal_power(k)).sum();
            assert!(pw <= pu);
        }
        assert!(unweighted.max_off_diagonal() > weighted.max_off_diagonal());
    }

    #[test]
    fn weighted_ischi_ten_db_below_ici_for_small_cfo() {
        let plain = ici_freq(256, 0.05, 0.0).unwrap();
        let w = ischi(&plain, true).unwrap();
        for k in [0, 40, 127] {
            let ratio = plain.off_diagonal_power(2 * k) / w.off_diagonal_power(k);
            assert!(10.0 * ratio.log10() >= 10.0);
        }
    }

    #[test]
    fn pcc_envelope_values_and_shape() {
        let e = envelope_pcc(256).unwrap();
        assert_eq!(e[0], 0.0);
        assert!((e[128] - 2.0).abs() < 1e-15);
        assert!(envelope_pcc(1).is_err());
        for kp in [0usize, 5, 60, 127] {
            let mut x = vec![Complex64::new(0.0, 0.0); 256];
            x[2 * kp] = Complex64::new(1.0, 0.0);
            x[2 * kp + 1] = Complex64::new(-1.0, 0.0);
            let t = dft(&x, true).unwrap();
            let scale = t[128].norm() / e[128];
            for (v, w) in t.iter().zip(&e) {
                assert!((v.norm() - scale * w).abs() <= 1e-10 * scale * 2.0);
            }
        }
    }

    fn synthetic(power: f64) -> PsdEstimate {
        // Line spectrum with ripple so the fit sees distinct local maxima.
        let freq: Vec<f64> = (1..4000).map(|i| i as f64 * 0.05).collect();
        let psd_db = freq
            .iter()
            .map(|f| 10.0 * (f.powf(-power) * (1.0 + 0.5 * (2.0 * PI * f).cos())).log10())
            .collect();
        PsdEstimate { freq, psd_db }
    }

    #[test]
    fn slope_of_power_laws() {
        let s2 = oob_slope(&synthetic(2.0), 0.0, (5.0, 50.0)).unwrap();
        let s4 = oob_slope(&synthetic(4.0), 0.0, (5.0, 50.0)).unwrap();
        assert!((s2 + 20.0).abs() < 1.0, "{s2}");
        assert!((s4 + 40.0).abs() < 1.0, "{s4}");
        assert!(matches!(oob_slope(&synthetic(2.0), 0.0, (5.0, 6.0)), Err(Error::FitRegion { .. })));
    }

    #[test]
    fn envelope_lengths() {
        let alloc = SubbandAllocation::new(12, vec![40], 0);
        let mut rng = SeededRng::new(1, 0);
        for (cfg, span) in [
            (WaveformConfig::cp_ofdm(256, 32), 288),
            (WaveformConfig::pcc_ofdm(256, true), 256),
            (WaveformConfig::ufmc(256, 33), 288),
        ] {
            let e = time_envelope(&cfg, &alloc, 50, &mut rng).unwrap();
            assert_eq!(e.len(), span);
        }
    }

    #[test]
    fn psd_needs_enough_symbols() {
        let alloc = SubbandAllocation::new(12, vec![40], 0);
        let mut rng = SeededRng::new(1, 0);
        assert!(psd_estimate(&WaveformConfig::cp_ofdm(256, 32), &alloc, 50, &mut rng).is_err());
    }

    #[test]
    fn cp_ofdm_in_band_is_flat() {
        let alloc = SubbandAllocation::new(12, vec![40], 0);
        let mut rng = SeededRng::new(2, 0);
        let psd = psd_estimate(&WaveformConfig::cp_ofdm(256, 32), &alloc, 4000, &mut rng).unwrap();
        // sample at subcarrier centres
        for k in 40..52 {
            let i = psd.freq.iter().position(|f| (*f - k as f64).abs() < 1e-9).unwrap();
            assert!(psd.psd_db[i].abs() < 1.0, "subcarrier {k} at {} dB", psd.psd_db[i]);
        }
    }
}
