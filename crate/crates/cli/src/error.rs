use std::path::PathBuf;

use nested_mz_core::dynamics::DynamicsError;
use nested_mz_core::smallsignal::SmallSignalError;
use thiserror::Error;

use crate::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Scenario {
        path: String,
        #[source]
        source: ScenarioError,
    },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ScenarioError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    SmallSignal(#[from] SmallSignalError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for anything wrong with the input, 2 when the numerics fail.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { .. } | CliError::Invalid(_) | CliError::SmallSignal(_) | CliError::Read { .. } => 1,
            CliError::Dynamics(e) => match e {
                DynamicsError::NonFiniteSignal { .. } | DynamicsError::TraceTooShort { .. } => 2,
                _ => 1,
            },
            CliError::Write { .. } => 2,
        }
    }
}
