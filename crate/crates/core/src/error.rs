use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A transform or segment length that must be a power of two was not.
    NotPowerOfTwo { what: &'static str, len: usize },
    /// Filter lengths are restricted to odd values.
    EvenFilterLength(usize),
    /// Bit count is not a multiple of the bits carried per symbol.
    BitCount { bits: usize, per_symbol: usize },
    /// Only 4-, 16- and 64-QAM are supported.
    UnsupportedOrder(usize),
    InputTooShort { needed: usize, got: usize },
    /// A configuration value violates an invariant of the model.
    InvalidConfig(String),
    /// Not enough spectral peaks in the requested fit region.
    FitRegion { points: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPowerOfTwo { what, len } => {
                write!(f, "{what} length {len} is not a power of two")
            }
            Error::EvenFilterLength(l) => write!(f, "filter length {l} must be odd"),
            Error::BitCount { bits, per_symbol } => {
                write!(f, "{bits} bits is not a multiple of {per_symbol} bits per symbol")
            }
            Error::UnsupportedOrder(m) => write!(f, "unsupported constellation order {m}"),
            Error::InputTooShort { needed, got } => {
                write!(f, "input too short: need {needed} samples, got {got}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::FitRegion { points } => {
                write!(f, "fit region holds {points} spectral peaks, need at least 8")
            }
        }
    }
}

impl core::error::Error for Error {}
