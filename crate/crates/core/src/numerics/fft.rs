use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::{Error, Result};

/// Iterative radix-2 FFT plan for one power-of-two size.
///
/// The forward transform is unscaled, `X[k] = sum_n x[n] e^{-j2πkn/N}`; the
/// inverse carries the `1/N` factor so that `inverse(forward(x)) == x`.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { what: "transform", len });
        }
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        // Twiddles evaluated directly, not by recurrence, to keep every factor
        // at full precision.
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Ok(Fft { len, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform. `buf.len()` must equal the plan length.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.process(buf, false);
    }

    /// In-place inverse transform, including the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.process(buf, true);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length does not match FFT plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

/// One-shot DFT (`inverse = false`) or inverse DFT with `1/N` scaling.
pub fn dft(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let plan = Fft::new(x.len())?;
    let mut out = x.to_vec();
    if inverse {
        plan.inverse(&mut out);
    } else {
        plan.forward(&mut out);
    }
    Ok(out)
}
