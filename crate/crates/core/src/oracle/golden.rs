use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GridResult, GridSpec};
use crate::error::{Error, Result};
use crate::model::{DecisionVector, ScenarioConfig};

/// SHA-256 of the scenario's canonical JSON, hex encoded.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let json = serde_json::to_vec(config).expect("scenario serializes");
    hex::encode(Sha256::digest(&json))
}

/// Stored oracle answer for a fixed scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRecord {
    pub config_hash: String,
    pub spec: GridSpec,
    pub objective: f64,
    pub points_evaluated: u64,
    pub decision: DecisionVector,
}

impl GoldenRecord {
    pub fn new(config: &ScenarioConfig, spec: &GridSpec, result: &GridResult) -> Self {
        GoldenRecord {
            config_hash: config_hash(config),
            spec: spec.clone(),
            objective: result.objective,
            points_evaluated: result.points_evaluated,
            decision: result.decision.clone(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Grid(format!("golden record: {e}")))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Grid(format!("golden record: {e}")))
    }

    /// Checks that a fresh result reproduces this record for `config`.
    pub fn check(&self, config: &ScenarioConfig, spec: &GridSpec, result: &GridResult, rel_tol: f64) -> Result<()> {
        if self.config_hash != config_hash(config) {
            return Err(Error::Grid("golden record was made for a different scenario".into()));
        }
        if &self.spec != spec {
            return Err(Error::Grid("golden record was made with a different grid".into()));
        }
        let gap = (result.objective - self.objective).abs();
        if !(gap <= rel_tol * self.objective.abs()) {
            return Err(Error::Grid(format!(
                "objective {} differs from the recorded {}",
                result.objective, self.objective
            )));
        }
        Ok(())
    }
}
