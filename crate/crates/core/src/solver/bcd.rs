use std::time::Instant;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::convexify::{build_subproblem1, build_subproblem2, ConvexSubproblem, LinearizationPoint};
use crate::error::Result;
use crate::model::{check_feasibility, max_violation, total_latency, DecisionVector, ScenarioConfig};

use super::{init_feasible, solve_convex, SolveSettings, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Both blocks, alternately.
    Joint,
    /// UAV block only; BS power and frequency stay at their initial values.
    Scheme1,
    /// BS block only; trajectory, UAV powers and frequencies stay at the initial point.
    Scheme2,
}

impl Scheme {
    fn blocks(self) -> (bool, bool) {
        match self {
            Scheme::Joint => (true, true),
            Scheme::Scheme1 => (true, false),
            Scheme::Scheme2 => (false, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "reason")]
pub enum BcdStatus {
    Converged,
    MaxIters,
    /// A sub-problem could not be solved; the trace ends at the last good iterate.
    Failed(String),
}

/// One BCD iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// `T_total` of the iterate, in seconds.
    pub true_objective: f64,
    /// Optimal value of the last convex sub-problem solved in this iteration.
    pub surrogate_objective: f64,
    /// Largest normalized constraint excess of the iterate (0 when feasible).
    pub max_violation: f64,
    pub wall_ms: f64,
    pub uav_accepted: bool,
    pub bs_accepted: bool,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub scheme: Scheme,
    /// Variables held fixed by the scheme, with their values.
    pub pinned: Vec<(String, f64)>,
    pub initial_objective: f64,
    pub rows: Vec<TraceRow>,
    pub status: BcdStatus,
    pub final_decision: DecisionVector,
}

impl OptimizationTrace {
    pub fn final_objective(&self) -> f64 {
        self.rows.last().map_or(self.initial_objective, |r| r.true_objective)
    }

    pub fn iterations(&self) -> usize {
        self.rows.len()
    }
}

enum BlockStep {
    Accepted { dv: DecisionVector, objective: f64, surrogate: f64, steps: usize },
    Rejected { surrogate: f64, steps: usize },
    Failed(String),
}

fn block_update(
    config: &ScenarioConfig,
    dv: &DecisionVector,
    current: f64,
    settings: &SolveSettings,
    build: fn(&ScenarioConfig, &LinearizationPoint) -> Result<ConvexSubproblem>,
    label: &str,
) -> BlockStep {
    let attempt = || -> Result<BlockStep> {
        let lp = LinearizationPoint::new(config, dv)?;
        let sp = build(config, &lp)?;
        let res = solve_convex(&sp, settings)?;
        if res.status == SolveStatus::Infeasible {
            return Ok(BlockStep::Failed(format!("{label} sub-problem is infeasible")));
        }
        let surrogate = sp.surrogate_objective(&res.scaled);
        let mut cand = dv.clone();
        sp.write_decisions(&res.values, &mut cand);
        let violations = check_feasibility(config, &cand)?;
        let objective = total_latency(config, &cand)?;
        if !violations.is_empty() || objective > current {
            warn!(
                "{label} update rejected: objective {objective:.9e} vs {current:.9e}, {} violations",
                violations.len()
            );
            return Ok(BlockStep::Rejected { surrogate, steps: res.newton_steps });
        }
        Ok(BlockStep::Accepted { dv: cand, objective, surrogate, steps: res.newton_steps })
    };
    attempt().unwrap_or_else(|e| BlockStep::Failed(format!("{label} sub-problem: {e}")))
}

/// Algorithm 1 from a given feasible point.
pub fn run_from(config: &ScenarioConfig, start: DecisionVector, scheme: Scheme, settings: &SolveSettings) -> Result<OptimizationTrace> {
    settings.validate()?;
    let initial_objective = total_latency(config, &start)?;
    let pinned = match scheme {
        Scheme::Joint => Vec::new(),
        Scheme::Scheme1 => (0..config.rounds)
            .flat_map(|k| [(format!("p_bs[{k}]"), start.p_bs[k]), (format!("f_bs[{k}]"), start.f_bs[k])])
            .collect(),
        Scheme::Scheme2 => (0..config.n_uavs())
            .flat_map(|n| (0..config.rounds).map(move |k| (n, k)))
            .flat_map(|(n, k)| {
                let p_mean = start.p_cm[n][k].iter().sum::<f64>() / config.slots_per_round as f64;
                [(format!("f_uav[{n}][{k}]"), start.f_uav[n][k]), (format!("mean_p_cm[{n}][{k}]"), p_mean)]
            })
            .collect(),
    };
    let (do_uav, do_bs) = scheme.blocks();
    let mut dv = start;
    let mut current = initial_objective;
    let mut rows = Vec::new();
    let mut status = BcdStatus::MaxIters;

    for iter in 1..=settings.max_bcd_iters {
        let clock = Instant::now();
        let before = current;
        let mut surrogate = current;
        let mut steps = 0;
        let mut accepted = [false, false];
        let mut failure = None;
        let updates: [(bool, fn(&ScenarioConfig, &LinearizationPoint) -> Result<ConvexSubproblem>, &str); 2] =
            [(do_uav, build_subproblem1, "UAV"), (do_bs, build_subproblem2, "BS")];
        for (slot, (enabled, build, label)) in updates.into_iter().enumerate() {
            if !enabled {
                continue;
            }
            match block_update(config, &dv, current, settings, build, label) {
                BlockStep::Accepted { dv: next, objective, surrogate: s, steps: k } => {
                    dv = next;
                    current = objective;
                    surrogate = s;
                    steps += k;
                    accepted[slot] = true;
                }
                BlockStep::Rejected { surrogate: s, steps: k } => {
                    surrogate = s;
                    steps += k;
                }
                BlockStep::Failed(msg) => {
                    failure = Some(msg);
                    break;
                }
            }
        }
        if let Some(msg) = failure {
            warn!("iteration {iter}: {msg}");
            status = BcdStatus::Failed(msg);
            break;
        }
        rows.push(TraceRow {
            iter,
            true_objective: current,
            surrogate_objective: surrogate,
            max_violation: max_violation(config, &dv)?,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
            uav_accepted: accepted[0],
            bs_accepted: accepted[1],
            newton_steps: steps,
        });
        debug!("iteration {iter}: T_total = {current:.9e} s, surrogate {surrogate:.9e} s, {steps} Newton steps");
        if (before - current).abs() < settings.bcd_tol * before.abs() {
            status = BcdStatus::Converged;
            break;
        }
    }
    info!("{scheme:?}: {:?} after {} iterations, T_total = {current:.6e} s", status, rows.len());
    Ok(OptimizationTrace { scheme, pinned, initial_objective, rows, status, final_decision: dv })
}

/// Algorithm 1: alternate both block sub-problems from [`init_feasible`].
pub fn run_algorithm1(config: &ScenarioConfig, settings: &SolveSettings) -> Result<OptimizationTrace> {
    run_scheme(config, Scheme::Joint, settings)
}

pub fn run_scheme(config: &ScenarioConfig, scheme: Scheme, settings: &SolveSettings) -> Result<OptimizationTrace> {
    let (start, _) = init_feasible(config)?;
    run_from(config, start, scheme, settings)
}
