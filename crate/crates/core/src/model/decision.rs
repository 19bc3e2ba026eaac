use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Optimization variables of the joint latency problem.
///
/// Trajectory and communication power are indexed `[uav][round][slot]`;
/// sensing power and UAV CPU frequency `[uav][round]`; BS power and frequency
/// `[round]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionVector {
    pub x: Vec<Vec<Vec<f64>>>,
    pub y: Vec<Vec<Vec<f64>>>,
    pub p_se: Vec<Vec<f64>>,
    pub p_cm: Vec<Vec<Vec<f64>>>,
    pub f_uav: Vec<Vec<f64>>,
    pub p_bs: Vec<f64>,
    pub f_bs: Vec<f64>,
}

impl DecisionVector {
    /// All-zero decision vector shaped for `config`.
    pub fn zeros(config: &ScenarioConfig) -> Self {
        let (n, k, t) = (config.n_uavs(), config.rounds, config.slots_per_round);
        let cube = vec![vec![vec![0.0; t]; k]; n];
        DecisionVector {
            x: cube.clone(),
            y: cube.clone(),
            p_se: vec![vec![0.0; k]; n],
            p_cm: cube,
            f_uav: vec![vec![0.0; k]; n],
            p_bs: vec![0.0; k],
            f_bs: vec![0.0; k],
        }
    }

    pub fn check_dims(&self, config: &ScenarioConfig) -> Result<()> {
        let (n, k, t) = (config.n_uavs(), config.rounds, config.slots_per_round);
        let cube_ok = |c: &Vec<Vec<Vec<f64>>>| {
            c.len() == n && c.iter().all(|r| r.len() == k && r.iter().all(|s| s.len() == t))
        };
        let mat_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == k);
        let checks = [
            ("x", cube_ok(&self.x)),
            ("y", cube_ok(&self.y)),
            ("p_cm", cube_ok(&self.p_cm)),
            ("p_se", mat_ok(&self.p_se)),
            ("f_uav", mat_ok(&self.f_uav)),
            ("p_bs", self.p_bs.len() == k),
            ("f_bs", self.f_bs.len() == k),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::Dimension(format!(
                    "{name} is not shaped for N={n}, K={k}, T={t}"
                )));
            }
        }
        Ok(())
    }

    /// Position occupied before slot `t` of round `k`: the previous slot, the
    /// last slot of the previous round, or the configured start.
    pub fn previous_position(&self, config: &ScenarioConfig, n: usize, k: usize, t: usize) -> [f64; 2] {
        if t > 0 {
            [self.x[n][k][t - 1], self.y[n][k][t - 1]]
        } else if k > 0 {
            let last = config.slots_per_round - 1;
            [self.x[n][k - 1][last], self.y[n][k - 1][last]]
        } else {
            config.uavs[n].initial_xy
        }
    }

    /// Copy the UAV-side variables (trajectory, powers, CPU frequency) from `other`.
    pub fn set_uav_block(&mut self, other: &DecisionVector) {
        self.x.clone_from(&other.x);
        self.y.clone_from(&other.y);
        self.p_se.clone_from(&other.p_se);
        self.p_cm.clone_from(&other.p_cm);
        self.f_uav.clone_from(&other.f_uav);
    }

    /// Copy the BS-side variables from `other`.
    pub fn set_bs_block(&mut self, other: &DecisionVector) {
        self.p_bs.clone_from(&other.p_bs);
        self.f_bs.clone_from(&other.f_bs);
    }
}
