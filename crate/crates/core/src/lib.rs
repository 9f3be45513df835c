//! Multicarrier waveform models for uplink OFDMA studies.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical
//! machinery: transforms and filter design, square-QAM modems, the CP-OFDM,
//! PCC-OFDM and UFMC transceiver chains, the multiuser uplink channel, the
//! closed-form interference analysis and a single-frame link simulation.
//! Parallel Monte-Carlo drivers, file formats and the command line live in
//! the `mcwave` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod link;
pub mod modem;
pub mod numerics;
pub mod uplink;
pub mod waveforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
