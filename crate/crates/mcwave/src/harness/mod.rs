//! Scenario-driven experiments: BER curves, required-Eb/N0 searches and the
//! canonical sweep families.

pub mod engine;
pub mod output;
pub mod scenario;
pub mod search;
pub mod sweep;

pub use engine::{run_ber, run_point, BerRecord, StopRule};
pub use scenario::{Modulation, Scenario, UserSpec, WaveformName, WaveformSpec, TWO_USER_START};
pub use search::{required_ebn0, required_for, RequiredEbn0, SearchSettings};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] mcwave_core::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
