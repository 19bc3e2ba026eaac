//! Scenario files, commands and CSV output behind the `uavfl` binary.

pub mod commands;
pub mod error;
pub mod scenario_file;
pub mod units;

pub use error::{CliError, CliResult};

/// Reads a scenario file; `None` selects the bundled default.
pub fn load_scenario(path: Option<&std::path::Path>) -> CliResult<uavfl_core::model::ScenarioConfig> {
    let (label, text) = match path {
        Some(p) => (p.display().to_string(), std::fs::read_to_string(p)?),
        None => ("<bundled default>".to_string(), scenario_file::DEFAULT_SCENARIO.to_string()),
    };
    scenario_file::parse_scenario(&text).map_err(|source| CliError::Scenario { path: label, source })
}
