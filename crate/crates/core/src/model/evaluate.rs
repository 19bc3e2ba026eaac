use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::decision::DecisionVector;
use super::latency::*;
use crate::error::Result;

/// Absolute tolerance on constraints normalized by their bound.
pub const FEAS_TOL: f64 = 1e-6;

/// Per-(UAV, round) latency terms plus the round and total latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub t_sense: Vec<Vec<f64>>,
    pub t_train: Vec<Vec<f64>>,
    pub t_upload: Vec<Vec<f64>>,
    pub t_agg: Vec<Vec<f64>>,
    pub t_download: Vec<Vec<f64>>,
    pub t_round: Vec<f64>,
    pub t_total: f64,
}

impl LatencyBreakdown {
    /// Five-term latency of UAV `n` in round `k`.
    pub fn uav_sum(&self, n: usize, k: usize) -> f64 {
        self.t_sense[n][k] + self.t_train[n][k] + self.t_upload[n][k] + self.t_agg[n][k] + self.t_download[n][k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_sense: Vec<Vec<f64>>,
    pub e_train: Vec<Vec<f64>>,
    pub e_upload: Vec<Vec<f64>>,
    pub e_total: Vec<f64>,
}

/// Uplink rate of UAV `n` in every slot of round `k`.
pub fn uplink_rates(config: &ScenarioConfig, dv: &DecisionVector, n: usize, k: usize) -> Result<Vec<f64>> {
    let g0 = config.gamma0();
    let bw = config.uavs[n].bandwidth;
    (0..config.slots_per_round)
        .map(|t| {
            let d = distance_to_bs(dv.x[n][k][t], dv.y[n][k][t], config.altitude);
            uplink_rate(dv.p_cm[n][k][t], d, bw, g0)
        })
        .collect()
}

/// Distance from which UAV `n` receives the round-`k` broadcast (last slot).
pub fn download_distance(config: &ScenarioConfig, dv: &DecisionVector, n: usize, k: usize) -> f64 {
    let t = config.slots_per_round - 1;
    distance_to_bs(dv.x[n][k][t], dv.y[n][k][t], config.altitude)
}

fn uav_energy_terms(config: &ScenarioConfig, dv: &DecisionVector, n: usize, k: usize) -> Result<(f64, f64, f64)> {
    let u = &config.uavs[n];
    let e_se = sensing_energy(dv.p_se[n][k], sensing_time(config.unit_sense_time, u.samples[k]));
    let e_tr = training_energy(
        config.local_iters as f64,
        u.switch_cap[k],
        u.cycles_per_sample[k],
        u.samples[k],
        dv.f_uav[n][k],
    );
    let rates = uplink_rates(config, dv, n, k)?;
    let e_up = upload_energy(config.payload_per_slot(), &rates, &dv.p_cm[n][k])?;
    Ok((e_se, e_tr, e_up))
}

/// Energy consumed by every UAV.
pub fn evaluate_energy(config: &ScenarioConfig, dv: &DecisionVector) -> Result<EnergyBreakdown> {
    dv.check_dims(config)?;
    let (nn, kk) = (config.n_uavs(), config.rounds);
    let mut e = EnergyBreakdown {
        e_sense: vec![vec![0.0; kk]; nn],
        e_train: vec![vec![0.0; kk]; nn],
        e_upload: vec![vec![0.0; kk]; nn],
        e_total: vec![0.0; nn],
    };
    for n in 0..nn {
        for k in 0..kk {
            let (se, tr, up) = uav_energy_terms(config, dv, n, k)?;
            e.e_sense[n][k] = se;
            e.e_train[n][k] = tr;
            e.e_upload[n][k] = up;
            e.e_total[n] += se + tr + up;
        }
    }
    Ok(e)
}

/// Latency and energy of a full schedule.
pub fn evaluate(config: &ScenarioConfig, dv: &DecisionVector) -> Result<(LatencyBreakdown, EnergyBreakdown)> {
    dv.check_dims(config)?;
    let (nn, kk) = (config.n_uavs(), config.rounds);
    let g0 = config.gamma0();
    let zeros = vec![vec![0.0; kk]; nn];
    let mut lat = LatencyBreakdown {
        t_sense: zeros.clone(),
        t_train: zeros.clone(),
        t_upload: zeros.clone(),
        t_agg: zeros.clone(),
        t_download: zeros,
        t_round: vec![0.0; kk],
        t_total: 0.0,
    };
    for k in 0..kk {
        let t_agg = aggregation_time(config.cycles_per_sample_bs[k], config.agg_samples[k], dv.f_bs[k])?;
        let mut worst = f64::NEG_INFINITY;
        for n in 0..nn {
            let u = &config.uavs[n];
            lat.t_sense[n][k] = sensing_time(config.unit_sense_time, u.samples[k]);
            lat.t_train[n][k] =
                training_time(config.local_iters as f64, u.cycles_per_sample[k], u.samples[k], dv.f_uav[n][k])?;
            let rates = uplink_rates(config, dv, n, k)?;
            lat.t_upload[n][k] = upload_time(config.payload_per_slot(), &rates)?;
            lat.t_agg[n][k] = t_agg;
            let r_dl = downlink_rate(dv.p_bs[k], download_distance(config, dv, n, k), config.bw_bs, g0)?;
            lat.t_download[n][k] = download_time(config.model_size_down, r_dl)?;
            worst = worst.max(lat.uav_sum(n, k));
        }
        lat.t_round[k] = worst;
    }
    lat.t_total = lat.t_round.iter().sum();
    let energy = evaluate_energy(config, dv)?;
    Ok((lat, energy))
}

/// Total latency only.
pub fn total_latency(config: &ScenarioConfig, dv: &DecisionVector) -> Result<f64> {
    evaluate(config, dv).map(|(l, _)| l.t_total)
}

/// Identifies one constraint of the joint problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintRef {
    SensePower { n: usize, k: usize },
    CommPower { n: usize, k: usize, t: usize },
    BsPower { k: usize },
    UavFrequency { n: usize, k: usize },
    BsFrequency { k: usize },
    Energy { n: usize },
    Displacement { n: usize, k: usize, t: usize },
}

impl fmt::Display for ConstraintRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ConstraintRef::SensePower { n, k } => write!(f, "sensing power box (uav {n}, round {k})"),
            ConstraintRef::CommPower { n, k, t } => {
                write!(f, "communication power box (uav {n}, round {k}, slot {t})")
            }
            ConstraintRef::BsPower { k } => write!(f, "BS power box (round {k})"),
            ConstraintRef::UavFrequency { n, k } => write!(f, "UAV frequency box (uav {n}, round {k})"),
            ConstraintRef::BsFrequency { k } => write!(f, "BS frequency box (round {k})"),
            ConstraintRef::Energy { n } => write!(f, "energy budget (uav {n})"),
            ConstraintRef::Displacement { n, k, t } => {
                write!(f, "per-slot displacement (uav {n}, round {k}, slot {t})")
            }
        }
    }
}

/// A violated constraint and its excess normalized by the constraint's bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintRef,
    pub excess: f64,
}

/// Normalized excess of `lo <= v <= hi` (0 lower bound, positive cap).
fn box_excess(v: f64, hi: f64) -> f64 {
    if !v.is_finite() {
        return f64::INFINITY;
    }
    ((v - hi) / hi).max(-v / hi)
}

/// Largest normalized excess over every constraint; negative when all hold with slack.
pub fn constraint_excesses(config: &ScenarioConfig, dv: &DecisionVector) -> Result<Vec<(ConstraintRef, f64)>> {
    dv.check_dims(config)?;
    let (nn, kk, tt) = (config.n_uavs(), config.rounds, config.slots_per_round);
    let mut out = Vec::new();
    for n in 0..nn {
        let u = &config.uavs[n];
        for k in 0..kk {
            out.push((ConstraintRef::SensePower { n, k }, box_excess(dv.p_se[n][k], u.p_se_max)));
            out.push((ConstraintRef::UavFrequency { n, k }, box_excess(dv.f_uav[n][k], u.f_max)));
            for t in 0..tt {
                out.push((ConstraintRef::CommPower { n, k, t }, box_excess(dv.p_cm[n][k][t], u.p_cm_max)));
                let [px, py] = dv.previous_position(config, n, k, t);
                let step = ((dv.x[n][k][t] - px).powi(2) + (dv.y[n][k][t] - py).powi(2)).sqrt();
                let excess = if step.is_finite() { (step - config.max_step()) / config.max_step() } else { f64::INFINITY };
                out.push((ConstraintRef::Displacement { n, k, t }, excess));
            }
        }
    }
    for k in 0..kk {
        out.push((ConstraintRef::BsPower { k }, box_excess(dv.p_bs[k], config.p_bs_max)));
        out.push((ConstraintRef::BsFrequency { k }, box_excess(dv.f_bs[k], config.f_bs_max)));
    }
    // Energy is evaluated only when the boxes hold well enough for rates to exist.
    for n in 0..nn {
        let mut total = 0.0;
        let mut ok = true;
        for k in 0..kk {
            match uav_energy_terms(config, dv, n, k) {
                Ok((a, b, c)) => total += a + b + c,
                Err(_) => ok = false,
            }
        }
        let excess = if !ok || !total.is_finite() {
            f64::INFINITY
        } else if config.e_max > 0.0 {
            (total - config.e_max) / config.e_max
        } else {
            total
        };
        out.push((ConstraintRef::Energy { n }, excess));
    }
    Ok(out)
}

/// Constraints violated beyond [`FEAS_TOL`]; empty iff the schedule is feasible.
pub fn check_feasibility(config: &ScenarioConfig, dv: &DecisionVector) -> Result<Vec<Violation>> {
    Ok(constraint_excesses(config, dv)?
        .into_iter()
        .filter(|&(_, e)| !(e <= FEAS_TOL))
        .map(|(constraint, excess)| Violation { constraint, excess })
        .collect())
}

/// Largest normalized excess, clamped at zero.
pub fn max_violation(config: &ScenarioConfig, dv: &DecisionVector) -> Result<f64> {
    Ok(constraint_excesses(config, dv)?
        .into_iter()
        .map(|(_, e)| if e.is_nan() { f64::INFINITY } else { e })
        .fold(0.0, f64::max))
}
