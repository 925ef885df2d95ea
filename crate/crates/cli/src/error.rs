use thiserror::Error;

use vqclab_core::Error as CoreError;

/// Failure of a CLI invocation, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input data. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// The run itself failed (resource cap, I/O). Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Resource(_) | CoreError::Io(_) => CliError::Runtime(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {err}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
