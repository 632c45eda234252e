use std::path::PathBuf;

use lhsim_core::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("{0}")]
    InvalidArgs(String),
    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    BadInput { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{failed} of {total} sweep runs failed")]
    SweepFailures { failed: usize, total: usize },
    #[error("{0} oracle check(s) failed")]
    OracleFailed(usize),
}

impl CliError {
    /// 1 for bad configuration or input, 2 for output IO, 3 for oracle
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. }
            | CliError::InvalidArgs(_)
            | CliError::Input { .. }
            | CliError::BadInput { .. }
            | CliError::SweepFailures { .. } => 1,
            CliError::Output { .. } => 2,
            CliError::OracleFailed(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(source: ConfigError) -> Self {
        CliError::Config { path: PathBuf::from("<arguments>"), source }
    }
}
