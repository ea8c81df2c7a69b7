use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// An exact channel table would exceed the configured alphabet cap.
    #[error("output alphabet of {size} symbols exceeds the cap of {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },

    #[error("invalid code specification: {0}")]
    InvalidSpec(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
