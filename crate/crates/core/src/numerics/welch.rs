use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use super::Fft;
use crate::{Error, Result};

/// Averaged Hann-windowed periodogram.
///
/// Output bin `k` is in FFT order and holds power per unit normalized
/// frequency (cycles/sample), so `sum(psd) / segment_len` equals the mean
/// squared magnitude of a constant-modulus input.
pub fn welch_psd(x: &[Complex64], segment_len: usize, overlap: usize) -> Result<Vec<f64>> {
    let plan = Fft::new(segment_len).map_err(|_| Error::NotPowerOfTwo {
        what: "segment",
        len: segment_len,
    })?;
    if overlap >= segment_len {
        return Err(Error::InvalidConfig("overlap must be smaller than the segment".into()));
    }
    if x.len() < segment_len {
        return Err(Error::InputTooShort { needed: segment_len, got: x.len() });
    }
    // periodic Hann
    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / segment_len as f64).cos())
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let hop = segment_len - overlap;
    let mut acc = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut segments = 0usize;
    let mut start = 0;
    while start + segment_len <= x.len() {
        for (b, (s, w)) in buf.iter_mut().zip(x[start..start + segment_len].iter().zip(&window)) {
            *b = s * *w;
        }
        plan.forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * window_energy);
    Ok(acc.into_iter().map(|v| v * scale).collect())
}
