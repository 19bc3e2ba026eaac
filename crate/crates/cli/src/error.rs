use thiserror::Error;

use crate::scenario_file::ScenarioError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed scenario {path}: {source}")]
    Scenario { path: String, source: ScenarioError },

    #[error("{0}")]
    Core(#[from] uavfl_core::Error),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 3 infeasible scenario, 4 malformed scenario, 5 too large for the oracle, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { .. } => 4,
            CliError::Core(uavfl_core::Error::InvalidConfig(_)) => 4,
            CliError::Core(uavfl_core::Error::InfeasibleScenario(_)) => 3,
            CliError::Core(uavfl_core::Error::TooLarge(_)) => 5,
            _ => 1,
        }
    }
}
