use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or physically invalid input (exit 2).
    #[error("{0}")]
    Validation(String),
    /// A checked property did not hold (exit 1).
    #[error("{0}")]
    Property(String),
    /// The requested NDPA realization does not exist (exit 3).
    #[error("synthesis infeasible: {0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Property(_) => 1,
            CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
