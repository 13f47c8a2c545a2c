use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outcome has zero probability ({probability:e})")]
    ZeroProbability { probability: f64 },

    #[error("{what} exceeds the configured cap ({count} > {cap})")]
    ResourceLimit { what: &'static str, count: u128, cap: u128 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported source {index}: {reason}")]
    UnsupportedSource { index: usize, reason: String },

    #[error("network is not connected")]
    Disconnected,
}
