//! Transforms, filters, spectral estimation and reproducible randomness.

mod fft;
mod filter;
mod rng;
mod welch;

pub use fft::{dft, Fft};
pub use filter::{chebyshev_filter, chebyshev_window, linear_convolve, ProtoFilter};
pub use rng::{substream, SeededRng};
pub use welch::welch_psd;

use num_complex::Complex64;

/// Mean of `|x|^2`.
pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// `10 log10(x)`.
pub fn db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

pub fn from_db(x_db: f64) -> f64 {
    libm::pow(10.0, x_db / 10.0)
}
