//! Gray-labelled square QAM mapping, hard-decision demapping and the
//! closed-form AWGN bit error rate used as a reference curve.
//!
//! Bit convention: the first half of each label drives the in-phase axis, the
//! second half the quadrature axis, most significant bit first. On each axis
//! the bits are a Gray code of the amplitude level, with all-zeros at the
//! most positive level (so 4-QAM maps `00` to `(1+j)/√2`).

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    levels_per_axis: usize,
    /// Amplitude scale that gives unit mean symbol energy.
    scale: f64,
    /// `points[label]`.
    points: Vec<Complex64>,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::UnsupportedOrder(order));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let levels_per_axis = 1usize << (bits_per_symbol / 2);
        let scale = 1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let half = bits_per_symbol / 2;
        let points = (0..order)
            .map(|label| {
                let i_level = gray_inverse(label >> half);
                let q_level = gray_inverse(label & (levels_per_axis - 1));
                Complex64::new(
                    Self::amplitude(levels_per_axis, i_level) * scale,
                    Self::amplitude(levels_per_axis, q_level) * scale,
                )
            })
            .collect();
        Ok(Constellation { order, bits_per_symbol, levels_per_axis, scale, points })
    }

    pub fn qam4() -> Self {
        Self::new(4).expect("4-QAM is supported")
    }

    pub fn qam16() -> Self {
        Self::new(16).expect("16-QAM is supported")
    }

    pub fn qam64() -> Self {
        Self::new(64).expect("64-QAM is supported")
    }

    // level 0 is the most positive amplitude
    fn amplitude(levels: usize, level: usize) -> f64 {
        (levels as f64 - 1.0) - 2.0 * level as f64
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Constellation points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Half the minimum distance between points.
    pub fn half_min_distance(&self) -> f64 {
        self.scale
    }

    fn axis_label(&self, value: f64) -> usize {
        let levels = self.levels_per_axis;
        // continuous level index; level i sits at (levels-1-2i)*scale
        let t = ((levels as f64 - 1.0) - value / self.scale) / 2.0;
        let max = (levels - 1) as f64;
        let t = t.clamp(0.0, max);
        let lo = t.floor();
        let frac = t - lo;
        let lo = lo as usize;
        if lo as f64 >= max {
            return gray(levels - 1);
        }
        if frac < 0.5 {
            gray(lo)
        } else if frac > 0.5 {
            gray(lo + 1)
        } else {
            gray(lo).min(gray(lo + 1))
        }
    }

    /// Label of the nearest point; ties go to the smaller label.
    pub fn decide(&self, symbol: Complex64) -> usize {
        let half = self.bits_per_symbol / 2;
        (self.axis_label(symbol.re) << half) | self.axis_label(symbol.im)
    }
}

/// Maps bits (one `u8` per bit, values 0/1) to symbols.
pub fn qam_map(bits: &[u8], c: &Constellation) -> Result<Vec<Complex64>> {
    let k = c.bits_per_symbol();
    if bits.is_empty() || !bits.len().is_multiple_of(k) {
        return Err(Error::BitCount { bits: bits.len(), per_symbol: k });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, b| (acc << 1) | (*b as usize & 1));
            c.points[label]
        })
        .collect())
}

/// Hard-decision demapping to the nearest constellation point.
pub fn qam_demap(symbols: &[Complex64], c: &Constellation) -> Vec<u8> {
    let k = c.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for s in symbols {
        let label = c.decide(*s);
        for b in (0..k).rev() {
            bits.push(((label >> b) & 1) as u8);
        }
    }
    bits
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Exact bit error probability of Gray-coded square QAM in AWGN.
pub fn theoretical_ber(c: &Constellation, ebn0_db: f64) -> f64 {
    theoretical_ber_order(c.order(), ebn0_db).expect("constellation order is validated")
}

/// Same as [`theoretical_ber`] keyed by order; `ebn0_db = +inf` gives 0.
pub fn theoretical_ber_order(order: usize, ebn0_db: f64) -> Result<f64> {
    if !matches!(order, 4 | 16 | 64) {
        return Err(Error::UnsupportedOrder(order));
    }
    if ebn0_db == f64::INFINITY {
        return Ok(0.0);
    }
    let m = order as f64;
    let sqrt_m = m.sqrt();
    let bits = order.trailing_zeros() as f64;
    let ebn0 = libm::pow(10.0, ebn0_db / 10.0);
    let arg = (3.0 * bits * ebn0 / (2.0 * (m - 1.0))).sqrt();
    let axis_bits = (bits / 2.0) as u32;
    let mut total = 0.0;
    for k in 1..=axis_bits {
        let p = libm::pow(2.0, (k - 1) as f64);
        let upper = ((1.0 - libm::pow(2.0, -(k as f64))) * sqrt_m) as usize;
        let mut pk = 0.0;
        for i in 0..upper {
            let ratio = i as f64 * p / sqrt_m;
            let sign = if (ratio.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let weight = p - (ratio + 0.5).floor();
            pk += sign * weight * libm::erfc((2 * i + 1) as f64 * arg);
        }
        total += pk / sqrt_m;
    }
    Ok(total / axis_bits as f64)
}
