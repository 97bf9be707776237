use thiserror::Error;

/// Errors raised by state construction, measures and the roof optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("support of the first state is not contained in the support of the second (weight {0:e} outside)")]
    SupportViolation(f64),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("state file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
