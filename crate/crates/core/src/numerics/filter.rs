use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::{Error, Result};

/// FIR prototype with unit-energy taps (`sum |h|^2 == 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProtoFilter {
    taps: Vec<Complex64>,
}

impl ProtoFilter {
    /// Normalizes `taps` to unit energy. The length must be odd.
    pub fn new(taps: Vec<Complex64>) -> Result<Self> {
        if taps.len().is_multiple_of(2) {
            return Err(Error::EvenFilterLength(taps.len()));
        }
        let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::InvalidConfig("filter taps have no finite energy".into()));
        }
        let scale = 1.0 / energy.sqrt();
        Ok(ProtoFilter { taps: taps.into_iter().map(|t| t * scale).collect() })
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `H(f) = sum_i h[i] e^{-j2π f i}` with `f` in cycles per sample.
    pub fn response(&self, freq: f64) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let theta = -2.0 * PI * freq * i as f64;
                h * Complex64::new(theta.cos(), theta.sin())
            })
            .sum()
    }
}

/// Full linear convolution, output length `x.len() + h.len() - 1`.
pub fn linear_convolve(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, xv) in x.iter().enumerate() {
        if *xv == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, hv) in h.iter().enumerate() {
            out[i + j] += xv * hv;
        }
    }
    out
}

fn chebyshev_poly(order: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (order * x.acos()).cos()
    } else if x > 1.0 {
        (order * x.acosh()).cosh()
    } else {
        let sign = if (order as i64) % 2 == 0 { 1.0 } else { -1.0 };
        sign * (order * (-x).acosh()).cosh()
    }
}

/// Dolph-Chebyshev window of odd length `len`, peak-normalized to 1, with all
/// sidelobes `sidelobe_atten_db` below the mainlobe.
pub fn chebyshev_window(len: usize, sidelobe_atten_db: f64) -> Result<Vec<f64>> {
    if len.is_multiple_of(2) {
        return Err(Error::EvenFilterLength(len));
    }
    if !(sidelobe_atten_db > 0.0) {
        return Err(Error::InvalidConfig("sidelobe attenuation must be positive".into()));
    }
    if len == 1 {
        return Ok(vec![1.0]);
    }
    let order = (len - 1) as f64;
    let ripple = libm::pow(10.0, sidelobe_atten_db / 20.0);
    let beta = (ripple.acosh() / order).cosh();
    // Frequency samples of the equiripple response, then a direct length-L
    // DFT back to the time domain (L is small and odd).
    let spectrum: Vec<f64> = (0..len)
        .map(|k| chebyshev_poly(order, beta * (PI * k as f64 / len as f64).cos()))
        .collect();
    let half = len.div_ceil(2);
    let mut causal = Vec::with_capacity(half);
    for n in 0..half {
        let mut acc = 0.0;
        for (k, s) in spectrum.iter().enumerate() {
            acc += s * (2.0 * PI * ((k * n) % len) as f64 / len as f64).cos();
        }
        causal.push(acc);
    }
    let mut window: Vec<f64> = causal[1..].iter().rev().copied().collect();
    window.extend_from_slice(&causal);
    let peak = window.iter().copied().fold(f64::MIN, f64::max);
    for w in window.iter_mut() {
        *w /= peak;
    }
    Ok(window)
}

/// Dolph-Chebyshev lowpass prototype of odd length `len`, shifted to
/// `center_norm_freq` (cycles/sample) and normalized to unit energy.
pub fn chebyshev_filter(
    len: usize,
    sidelobe_atten_db: f64,
    center_norm_freq: f64,
) -> Result<ProtoFilter> {
    if !(0.0..1.0).contains(&center_norm_freq) {
        return Err(Error::InvalidConfig("center frequency must lie in [0, 1)".into()));
    }
    let window = chebyshev_window(len, sidelobe_atten_db)?;
    let taps = window
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let theta = 2.0 * PI * center_norm_freq * i as f64;
            Complex64::new(theta.cos(), theta.sin()) * *w
        })
        .collect();
    ProtoFilter::new(taps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn convolve_small_cases() {
        assert_eq!(linear_convolve(&[c(1.0), c(2.0)], &[c(1.0)]), vec![c(1.0), c(2.0)]);
        assert_eq!(
            linear_convolve(&[c(1.0), c(0.0), c(0.0)], &[c(0.5), c(0.5)]),
            vec![c(0.5), c(0.5), c(0.0), c(0.0)]
        );
    }

    #[test]
    fn convolve_length_for_ufmc_symbol() {
        let x = vec![c(1.0); 256];
        let h = chebyshev_filter(33, 40.0, 0.0).unwrap();
        assert_eq!(linear_convolve(&x, h.taps()).len(), 288);
    }

    #[test]
    fn convolve_matches_direct_sum() {
        let mut rng = SeededRng::new(3, 0);
        let x: Vec<Complex64> = (0..50).map(|_| rng.complex_gaussian(1.0)).collect();
        let h: Vec<Complex64> = (0..9).map(|_| rng.complex_gaussian(1.0)).collect();
        let y = linear_convolve(&x, &h);
        for (n, yn) in y.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, hk) in h.iter().enumerate() {
                if n >= k && n - k < x.len() {
                    acc += hk * x[n - k];
                }
            }
            assert!((acc - yn).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_window() {
        let f = chebyshev_filter(1, 40.0, 0.0).unwrap();
        assert_eq!(f.taps(), &[c(1.0)]);
    }

    #[test]
    fn even_length_rejected() {
        assert_eq!(chebyshev_filter(32, 40.0, 0.0), Err(Error::EvenFilterLength(32)));
    }

    #[test]
    fn unit_energy_and_symmetry() {
        let f = chebyshev_filter(33, 40.0, 0.0).unwrap();
        let e: f64 = f.taps().iter().map(|t| t.norm_sqr()).sum();
        assert!((e - 1.0).abs() < 1e-12);
        for i in 0..33 {
            assert!((f.taps()[i] - f.taps()[32 - i]).norm() < 1e-12);
            assert!(f.taps()[i].im.abs() < 1e-15);
        }
    }

    #[test]
    fn sidelobes_below_attenuation() {
        let f = chebyshev_filter(33, 40.0, 0.0).unwrap();
        let grid = 4096;
        let mags: Vec<f64> =
            (0..grid).map(|k| f.response(k as f64 / grid as f64 - 0.5).norm()).collect();
        let centre = grid / 2;
        let peak = mags[centre];
        // walk out of the mainlobe to the first null on the positive side
        let mut edge = centre;
        while edge + 1 < grid && mags[edge + 1] < mags[edge] {
            edge += 1;
        }
        let width = edge - centre;
        let worst = mags
            .iter()
            .enumerate()
            .filter(|(k, _)| k.abs_diff(centre) >= width)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max);
        let level_db = 20.0 * (worst / peak).log10();
        assert!(level_db <= -40.0 + 1e-6, "sidelobe at {level_db} dB");
        assert!(level_db > -40.5, "equiripple design should touch -40 dB, got {level_db}");
    }

    #[test]
    fn modulation_property() {
        let base = chebyshev_filter(33, 40.0, 0.0).unwrap();
        let shifted = chebyshev_filter(33, 40.0, 0.25).unwrap();
        for i in 0..33 {
            let theta = 2.0 * PI * 0.25 * i as f64;
            let expected = base.taps()[i] * Complex64::new(theta.cos(), theta.sin());
            assert!((shifted.taps()[i] - expected).norm() < 1e-12);
        }
    }
}
