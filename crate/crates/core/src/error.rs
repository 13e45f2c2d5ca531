use std::io;

use thiserror::Error;

/// Errors produced by the statistics and persistence layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation received a sample with no observations.
    #[error("sample is empty")]
    EmptySample,

    /// A sample contains a NaN or infinite observation.
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    /// A scalar argument is NaN or infinite.
    #[error("{name} must be finite, got {value}")]
    NonFiniteArgument { name: &'static str, value: f64 },

    /// A probability-valued argument lies outside the open interval (0, 1).
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    /// A sample value fed to the uniformity test lies outside [0, 1].
    #[error("value {value} at index {index} lies outside the unit interval")]
    OutsideUnitInterval { index: usize, value: f64 },

    /// A structurally invalid parameter set.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two power curves cover different parameter grids.
    #[error("power curves have mismatched parameter grids")]
    GridMismatch,

    #[error(transparent)]
    Io(#[from] io::Error),

    /// A persisted ecdf file violates the `ecdf v1` format.
    #[error("malformed ecdf file at line {line}: {message}")]
    MalformedFile { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
