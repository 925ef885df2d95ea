use thiserror::Error;

/// Errors raised across the simulator, models and training loops.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A request that would exceed a configured resource cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An argument outside the mathematical domain of the operation
    /// (bad wire index, out-of-range basis index, non-finite input...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation was called incorrectly (length mismatch, missing
    /// angle, invalid hyper-parameter).
    #[error("usage error: {0}")]
    Usage(String),

    /// The requested mode is not supported by this operation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed serialized input.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// Serialized input carried an unexpected schema tag.
    #[error("schema version mismatch: expected {expected:?}, found {found:?}")]
    Version { expected: String, found: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
