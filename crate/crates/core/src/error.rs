use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A law or model parameter is out of its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation requiring a zero-mean (or positive-mean) law was applied
    /// to a law that violates the requirement.
    #[error("mean constraint violated: {0}")]
    MeanConstraint(String),

    /// The operation is not defined for this law or model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Configuration file or CLI argument problem.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while reading config or writing reports.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
