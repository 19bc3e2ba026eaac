use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_feasibility, distance_to_bs, download_distance, download_time, downlink_rate, uplink_rates, DecisionVector,
    ScenarioConfig,
};

/// Relative nudge applied to box-constrained variables sitting at zero so that
/// they can serve as expansion points.
pub const ZERO_NUDGE: f64 = 1e-9;

/// Auxiliary variables of the convexified problem.
///
/// `g`, `z`, `gamma`, `alpha` are indexed `[uav][round][slot]` and bound the
/// per-slot upload time, uplink rate, SNR and squared distance. `theta` is the
/// download-time slack, indexed `[uav][round]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackState {
    pub g: Vec<Vec<Vec<f64>>>,
    pub z: Vec<Vec<Vec<f64>>>,
    pub gamma: Vec<Vec<Vec<f64>>>,
    pub alpha: Vec<Vec<Vec<f64>>>,
    pub theta: Vec<Vec<f64>>,
}

impl SlackState {
    /// Slacks at which every slack constraint holds with equality for `dv`.
    pub fn tight(config: &ScenarioConfig, dv: &DecisionVector) -> Result<SlackState> {
        dv.check_dims(config)?;
        let (nn, kk, tt) = (config.n_uavs(), config.rounds, config.slots_per_round);
        let g0 = config.gamma0();
        let payload = config.payload_per_slot();
        let cube = vec![vec![vec![0.0; tt]; kk]; nn];
        let mut s = SlackState {
            g: cube.clone(),
            z: cube.clone(),
            gamma: cube.clone(),
            alpha: cube,
            theta: vec![vec![0.0; kk]; nn],
        };
        for n in 0..nn {
            for k in 0..kk {
                let rates = uplink_rates(config, dv, n, k)?;
                for t in 0..tt {
                    let d = distance_to_bs(dv.x[n][k][t], dv.y[n][k][t], config.altitude);
                    let alpha = d * d;
                    s.alpha[n][k][t] = alpha;
                    s.gamma[n][k][t] = g0 * dv.p_cm[n][k][t] / alpha;
                    s.z[n][k][t] = rates[t];
                    s.g[n][k][t] = if rates[t] > 0.0 { payload / rates[t] } else { f64::INFINITY };
                }
                let r_dl = downlink_rate(dv.p_bs[k], download_distance(config, dv, n, k), config.bw_bs, g0)?;
                s.theta[n][k] = download_time(config.model_size_down, r_dl)?;
            }
        }
        Ok(s)
    }

    fn all_positive(&self) -> bool {
        let cube_ok = |c: &Vec<Vec<Vec<f64>>>| c.iter().flatten().flatten().all(|v| v.is_finite() && *v > 0.0);
        cube_ok(&self.g)
            && cube_ok(&self.z)
            && cube_ok(&self.gamma)
            && cube_ok(&self.alpha)
            && self.theta.iter().flatten().all(|v| v.is_finite() && *v > 0.0)
    }
}

/// Decision variables and slacks at the current iterate; the right-hand sides
/// of every SCA bound are evaluated here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationPoint {
    pub dv: DecisionVector,
    pub slack: SlackState,
}

fn nudge(v: &mut f64, hi: f64) {
    let floor = ZERO_NUDGE * hi;
    if *v < floor {
        *v = floor;
    }
}

impl LinearizationPoint {
    /// Expansion point at `dv` with tight slacks. Variables at zero are nudged
    /// to [`ZERO_NUDGE`] of their box; the point must satisfy every constraint
    /// of the joint problem.
    pub fn new(config: &ScenarioConfig, dv: &DecisionVector) -> Result<LinearizationPoint> {
        dv.check_dims(config)?;
        let violations = check_feasibility(config, dv)?;
        if let Some(v) = violations.first() {
            return Err(Error::BadLinearizationPoint(format!(
                "{} violated by {:.3e} ({} violations)",
                v.constraint,
                v.excess,
                violations.len()
            )));
        }
        let mut dv = dv.clone();
        for (n, u) in config.uavs.iter().enumerate() {
            for k in 0..config.rounds {
                nudge(&mut dv.p_se[n][k], u.p_se_max);
                nudge(&mut dv.f_uav[n][k], u.f_max);
                for p in dv.p_cm[n][k].iter_mut() {
                    nudge(p, u.p_cm_max);
                }
            }
        }
        for k in 0..config.rounds {
            nudge(&mut dv.p_bs[k], config.p_bs_max);
            nudge(&mut dv.f_bs[k], config.f_bs_max);
        }
        let slack = SlackState::tight(config, &dv)?;
        if !slack.all_positive() {
            return Err(Error::BadLinearizationPoint("slack variables must be finite and positive".into()));
        }
        Ok(LinearizationPoint { dv, slack })
    }
}
