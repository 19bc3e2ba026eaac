use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use uavfl_core::model::{evaluate, DecisionVector, LatencyBreakdown, ScenarioConfig};
use uavfl_core::oracle::{grid_search, GridSpec};
use uavfl_core::solver::{run_algorithm1, run_scheme, BcdStatus, OptimizationTrace, Scheme, SolveSettings};

use crate::error::{CliError, CliResult};
use crate::units::{parse_quantity, FrequencyDim, PowerDim};

pub const SCHEME_NAMES: &str = "joint, uav-only, bs-only";

pub fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Joint => "joint",
        Scheme::Scheme1 => "uav-only",
        Scheme::Scheme2 => "bs-only",
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s.trim() {
        "joint" => Ok(Scheme::Joint),
        "uav-only" => Ok(Scheme::Scheme1),
        "bs-only" => Ok(Scheme::Scheme2),
        other => Err(format!("unknown scheme `{other}` (expected {SCHEME_NAMES})")),
    }
}

fn status_name(s: &BcdStatus) -> &'static str {
    match s {
        BcdStatus::Converged => "converged",
        BcdStatus::MaxIters => "max-iters",
        BcdStatus::Failed(_) => "failed",
    }
}

/// Scenario parameter that a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    FUavMax,
    PCmMax,
    FBsMax,
    PBsMax,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::FUavMax => "f_uav_max",
            SweepParam::PCmMax => "p_cm_max",
            SweepParam::FBsMax => "f_bs_max",
            SweepParam::PBsMax => "p_bs_max",
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, v: f64) {
        match self {
            SweepParam::FUavMax => config.set_f_uav_max(v),
            SweepParam::PCmMax => config.set_p_cm_max(v),
            SweepParam::FBsMax => config.f_bs_max = v,
            SweepParam::PBsMax => config.p_bs_max = v,
        }
    }

    /// Parses one sweep value: a bare SI number or a quantity with a unit.
    pub fn parse_value(self, text: &str) -> Result<f64, String> {
        let v = match text.trim().parse::<f64>() {
            Ok(v) => v,
            Err(_) => match self {
                SweepParam::FUavMax | SweepParam::FBsMax => parse_quantity::<FrequencyDim>(text)?,
                SweepParam::PCmMax | SweepParam::PBsMax => parse_quantity::<PowerDim>(text)?,
            },
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(format!("{} must be positive, got `{}`", self.name(), text.trim()))
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [SweepParam::FUavMax, SweepParam::PCmMax, SweepParam::FBsMax, SweepParam::PBsMax]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown sweep parameter `{s}` (expected f_uav_max, p_cm_max, f_bs_max or p_bs_max)"))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a trace as CSV. Comment lines carry the scheme, pinned values and,
/// when `timestamp` is given, the generation time. Without a timestamp the
/// wall-clock column is left empty so identical runs give identical bytes.
pub fn write_trace_csv<W: Write>(out: W, trace: &OptimizationTrace, timestamp: Option<u64>) -> CliResult<()> {
    let mut out = out;
    if let Some(ts) = timestamp {
        writeln!(out, "# generated_unix={ts}")?;
    }
    writeln!(out, "# scheme={}", scheme_name(trace.scheme))?;
    writeln!(out, "# status={}", status_name(&trace.status))?;
    writeln!(out, "# initial_objective_s={}", trace.initial_objective)?;
    for (name, v) in &trace.pinned {
        writeln!(out, "# pinned {name}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "true_objective_s", "surrogate_objective_s", "max_violation", "wall_ms"])?;
    for r in &trace.rows {
        w.write_record([
            r.iter.to_string(),
            r.true_objective.to_string(),
            r.surrogate_objective.to_string(),
            r.max_violation.to_string(),
            if timestamp.is_some() { r.wall_ms.to_string() } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Final point of a run, written as JSON next to the trace.
#[derive(Debug, Serialize)]
pub struct FinalPoint<'a> {
    pub scheme: &'static str,
    pub status: &'a BcdStatus,
    pub iterations: usize,
    pub objective_s: f64,
    pub latency: LatencyBreakdown,
    pub energy_j: Vec<f64>,
    pub decision: &'a DecisionVector,
}

pub fn final_point<'a>(config: &ScenarioConfig, trace: &'a OptimizationTrace) -> CliResult<FinalPoint<'a>> {
    let (latency, energy) = evaluate(config, &trace.final_decision)?;
    Ok(FinalPoint {
        scheme: scheme_name(trace.scheme),
        status: &trace.status,
        iterations: trace.iterations(),
        objective_s: latency.t_total,
        latency,
        energy_j: energy.e_total,
        decision: &trace.final_decision,
    })
}

/// Exit code for a finished run: 0 converged, 2 iteration cap, 1 sub-problem failure.
pub fn run_exit_code(trace: &OptimizationTrace) -> i32 {
    match trace.status {
        BcdStatus::Converged => 0,
        BcdStatus::MaxIters => 2,
        BcdStatus::Failed(_) => 1,
    }
}

pub fn cmd_run(config: &ScenarioConfig, scheme: Scheme, settings: &SolveSettings) -> CliResult<OptimizationTrace> {
    Ok(run_scheme(config, scheme, settings)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub scheme: Scheme,
    /// `None` when the scenario at this value has no feasible start.
    pub final_latency_s: Option<f64>,
    pub iterations: usize,
    pub status: String,
}

/// One independent run per (value, scheme), in parallel; rows follow the
/// order of `values`, then `schemes`.
pub fn cmd_sweep(
    config: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    schemes: &[Scheme],
    settings: &SolveSettings,
) -> CliResult<Vec<SweepRow>> {
    let jobs: Vec<(f64, Scheme)> = values.iter().flat_map(|&v| schemes.iter().map(move |&s| (v, s))).collect();
    jobs.par_iter()
        .map(|&(value, scheme)| {
            let mut c = config.clone();
            param.apply(&mut c, value);
            let row = |latency, iterations, status: &str| SweepRow {
                param,
                value,
                scheme,
                final_latency_s: latency,
                iterations,
                status: status.to_string(),
            };
            match run_scheme(&c, scheme, settings) {
                Ok(t) => Ok(row(Some(t.final_objective()), t.iterations(), status_name(&t.status))),
                Err(uavfl_core::Error::InfeasibleScenario(_)) => Ok(row(None, 0, "infeasible")),
                Err(e) => Err(CliError::from(e)),
            }
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow], timestamp: Option<u64>) -> CliResult<()> {
    let mut out = out;
    if let Some(ts) = timestamp {
        writeln!(out, "# generated_unix={ts}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param", "value", "scheme", "final_latency_s", "iterations", "status"])?;
    for r in rows {
        w.write_record([
            r.param.name().to_string(),
            r.value.to_string(),
            scheme_name(r.scheme).to_string(),
            opt(r.final_latency_s),
            r.iterations.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub scheme: Scheme,
    pub final_latency_s: f64,
    pub iterations: usize,
    pub status: String,
    /// Latency saved by the joint scheme relative to this one, in percent.
    pub joint_savings_pct: f64,
}

/// Runs all three schemes from the same feasible start.
pub fn cmd_compare(config: &ScenarioConfig, settings: &SolveSettings) -> CliResult<Vec<CompareRow>> {
    let traces: Vec<OptimizationTrace> = [Scheme::Joint, Scheme::Scheme1, Scheme::Scheme2]
        .par_iter()
        .map(|&s| run_scheme(config, s, settings))
        .collect::<Result<_, _>>()?;
    let joint = traces[0].final_objective();
    Ok(traces
        .iter()
        .map(|t| {
            let latency = t.final_objective();
            CompareRow {
                scheme: t.scheme,
                final_latency_s: latency,
                iterations: t.iterations(),
                status: status_name(&t.status).to_string(),
                joint_savings_pct: 100.0 * (latency - joint) / latency,
            }
        })
        .collect())
}

pub fn write_compare_csv<W: Write>(out: W, rows: &[CompareRow], timestamp: Option<u64>) -> CliResult<()> {
    let mut out = out;
    if let Some(ts) = timestamp {
        writeln!(out, "# generated_unix={ts}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "final_latency_s", "iterations", "status", "joint_savings_pct"])?;
    for r in rows {
        w.write_record([
            scheme_name(r.scheme).to_string(),
            r.final_latency_s.to_string(),
            r.iterations.to_string(),
            r.status.clone(),
            r.joint_savings_pct.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateReport {
    pub grid_objective_s: f64,
    pub solver_objective_s: f64,
    /// `(solver − grid) / grid` in percent; negative when the solver beats the grid.
    pub gap_pct: f64,
    pub grid_points_per_axis: usize,
    pub points_evaluated: u64,
    pub solver_iterations: usize,
    pub solver_status: String,
}

/// Compares Algorithm 1 with the brute-force grid on a tiny instance.
pub fn cmd_validate(config: &ScenarioConfig, grid_points: usize, settings: &SolveSettings) -> CliResult<ValidateReport> {
    let grid = grid_search(config, &GridSpec::with_points(grid_points))?;
    let trace = run_algorithm1(config, settings)?;
    let solver = trace.final_objective();
    Ok(ValidateReport {
        grid_objective_s: grid.objective,
        solver_objective_s: solver,
        gap_pct: 100.0 * (solver - grid.objective) / grid.objective,
        grid_points_per_axis: grid_points,
        points_evaluated: grid.points_evaluated,
        solver_iterations: trace.iterations(),
        solver_status: status_name(&trace.status).to_string(),
    })
}

pub fn write_validate_csv<W: Write>(out: W, r: &ValidateReport) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "grid_objective_s",
        "solver_objective_s",
        "gap_pct",
        "grid_points_per_axis",
        "points_evaluated",
        "solver_iterations",
        "solver_status",
    ])?;
    w.write_record([
        r.grid_objective_s.to_string(),
        r.solver_objective_s.to_string(),
        r.gap_pct.to_string(),
        r.grid_points_per_axis.to_string(),
        r.points_evaluated.to_string(),
        r.solver_iterations.to_string(),
        r.solver_status.clone(),
    ])?;
    w.flush()?;
    Ok(())
}
