//! Error type for the command-line layer, mapping every failure onto the
//! process exit codes the tool commits to: 2 for usage errors, 3 for data
//! errors, 4 for numeric failures.

use crate::checkpoint::CheckpointError;

/// A failed invocation, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad flag combinations, or a bad config file. Exit 2.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, unwritable, or malformed inputs and artifacts. Exit 3.
    #[error("{0}")]
    Data(String),
    /// Divergence or a singular update during training. Exit 4.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<ratecast::Error> for CliError {
    fn from(e: ratecast::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o: {e}"))
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
