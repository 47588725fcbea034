use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum TltError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("acceptance rate too low: {0}")]
    AcceptanceRateTooLow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TltError>;

impl TltError {
    pub fn invalid_parameter(msg: impl Into<String>) -> Self {
        TltError::InvalidParameter(msg.into())
    }
}
