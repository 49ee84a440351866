use std::path::PathBuf;
use std::process::ExitCode;

use lamvoc::VocError;
use thiserror::Error;

use crate::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] VocError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("stability certificate not established: {0}")]
    Unstable(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 4 for a strict-mode
    /// certificate failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(_) | CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Unstable(_) => 4,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
