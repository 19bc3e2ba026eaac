use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_feasibility, evaluate, evaluate_energy, total_latency, DecisionVector, ScenarioConfig};
use crate::solver::straight_line_start;

/// Upper bound on evaluated grid points.
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryGrid {
    /// Every slot flies the full step toward the BS (exact: latency and energy
    /// both fall with distance).
    Greedy,
    /// Square grid clipped to a disc of radius `V_max·δ_t` around the
    /// straight-line path, per slot.
    Disc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub trajectory: TrajectoryGrid,
    /// Apply [`monotone_pin`] to UAVs whose energy budget is slack.
    pub pin_slack_uavs: bool,
    pub max_uavs: usize,
    pub max_rounds: usize,
    pub max_slots: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_axis: 9,
            trajectory: TrajectoryGrid::Greedy,
            pin_slack_uavs: true,
            max_uavs: 2,
            max_rounds: 1,
            max_slots: 2,
        }
    }
}

impl GridSpec {
    pub fn with_points(points_per_axis: usize) -> Self {
        GridSpec { points_per_axis, ..Default::default() }
    }

    pub fn check_instance(&self, config: &ScenarioConfig) -> Result<()> {
        if self.points_per_axis < 2 {
            return Err(Error::Grid(format!("need at least 2 points per axis, got {}", self.points_per_axis)));
        }
        let (n, k, t) = (config.n_uavs(), config.rounds, config.slots_per_round);
        if n > self.max_uavs || k > self.max_rounds || t > self.max_slots {
            return Err(Error::TooLarge(format!(
                "N={n}, K={k}, T={t} exceeds the caps N<={}, K<={}, T<={}",
                self.max_uavs, self.max_rounds, self.max_slots
            )));
        }
        Ok(())
    }
}

/// A variable fixed at a provably optimal value before gridding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "var")]
pub enum Pin {
    /// Sensing power only costs energy: 0.
    SensePower { n: usize },
    /// BS power and frequency only shorten rounds and are not energy limited: caps.
    BsPower,
    BsFrequency,
    /// Full step toward the BS in every slot.
    Trajectory { n: usize },
    /// UAV power and CPU frequency at their caps, valid when that point meets
    /// the energy budget.
    CommPower { n: usize },
    UavFrequency { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedPoint {
    /// Pinned entries hold their values; the rest are placeholders.
    pub decision: DecisionVector,
    pub pins: Vec<Pin>,
}

impl PinnedPoint {
    pub fn is_pinned(&self, pin: Pin) -> bool {
        self.pins.contains(&pin)
    }
}

/// Positions reached by flying the full step toward the BS in every slot.
fn greedy_trajectory(config: &ScenarioConfig, n: usize) -> Vec<Vec<[f64; 2]>> {
    let step = config.max_step();
    let mut pos = config.uavs[n].initial_xy;
    (0..config.rounds)
        .map(|_| {
            (0..config.slots_per_round)
                .map(|_| {
                    let r = pos[0].hypot(pos[1]);
                    pos = if r <= step { [0.0, 0.0] } else { [pos[0] * (1.0 - step / r), pos[1] * (1.0 - step / r)] };
                    pos
                })
                .collect()
        })
        .collect()
}

/// Variables that can be fixed without losing optimality.
///
/// Always pins sensing power to 0, the BS block at its caps and the greedy
/// trajectory. For a UAV whose energy budget holds with power and frequency at
/// their caps, those are pinned too.
pub fn monotone_pin(config: &ScenarioConfig) -> Result<PinnedPoint> {
    config.validate()?;
    let mut dv = DecisionVector::zeros(config);
    let mut pins = vec![Pin::BsPower, Pin::BsFrequency];
    dv.p_bs.fill(config.p_bs_max);
    dv.f_bs.fill(config.f_bs_max);
    for (n, u) in config.uavs.iter().enumerate() {
        pins.push(Pin::SensePower { n });
        pins.push(Pin::Trajectory { n });
        for (k, slots) in greedy_trajectory(config, n).into_iter().enumerate() {
            for (t, [x, y]) in slots.into_iter().enumerate() {
                dv.x[n][k][t] = x;
                dv.y[n][k][t] = y;
                dv.p_cm[n][k][t] = u.p_cm_max;
            }
            dv.f_uav[n][k] = u.f_max;
        }
    }
    let energy = evaluate_energy(config, &dv)?;
    for n in 0..config.n_uavs() {
        if energy.e_total[n] <= config.e_max {
            pins.push(Pin::CommPower { n });
            pins.push(Pin::UavFrequency { n });
        }
    }
    Ok(PinnedPoint { decision: dv, pins })
}

/// Best feasible grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    /// Total latency of `decision`, in seconds.
    pub objective: f64,
    pub decision: DecisionVector,
    pub points_per_axis: usize,
    pub points_evaluated: u64,
    pub pins: Vec<Pin>,
}

fn axis(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let span = hi - lo;
    (0..points).map(|i| if i + 1 == points { hi } else { lo + span * i as f64 / (points - 1) as f64 }).collect()
}

/// Candidate trajectories of one UAV, each as `[round][slot]` positions.
fn trajectories(config: &ScenarioConfig, n: usize, spec: &GridSpec, greedy: bool) -> Result<Vec<Vec<Vec<[f64; 2]>>>> {
    if greedy {
        return Ok(vec![greedy_trajectory(config, n)]);
    }
    let r = config.max_step();
    let offsets: Vec<[f64; 2]> = {
        let a = axis(-r, r, spec.points_per_axis);
        a.iter()
            .flat_map(|&dx| a.iter().map(move |&dy| [dx, dy]))
            .filter(|o| o[0].hypot(o[1]) <= r * (1.0 + 1e-12))
            .collect()
    };
    let slots = config.rounds * config.slots_per_round;
    let total = (offsets.len() as u64).saturating_pow(slots as u32);
    if total > MAX_GRID_POINTS {
        return Err(Error::TooLarge(format!("{total} trajectory candidates for UAV {n}")));
    }
    let path = straight_line_start(config)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; slots];
    loop {
        let traj: Vec<Vec<[f64; 2]>> = (0..config.rounds)
            .map(|k| {
                (0..config.slots_per_round)
                    .map(|t| {
                        let o = offsets[idx[k * config.slots_per_round + t]];
                        [path.x[n][k][t] + o[0], path.y[n][k][t] + o[1]]
                    })
                    .collect()
            })
            .collect();
        out.push(traj);
        if !advance(&mut idx, offsets.len()) {
            break;
        }
    }
    Ok(out)
}

/// Odometer increment; `false` after the last combination.
fn advance(idx: &mut [usize], base: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < base {
            return true;
        }
        *i = 0;
    }
    false
}

struct UavBest {
    objective: f64,
    decision: DecisionVector,
    evaluated: u64,
}

/// Exhaustive search for one UAV on its single-UAV scenario (BS block pinned).
fn search_uav(config: &ScenarioConfig, n: usize, spec: &GridSpec, pinned: &PinnedPoint) -> Result<UavBest> {
    let single = config.single_uav(n);
    let u = &config.uavs[n];
    let (kk, tt) = (config.rounds, config.slots_per_round);
    let fixed_power = pinned.is_pinned(Pin::CommPower { n });
    let p_axis = if fixed_power { vec![u.p_cm_max] } else { axis(0.0, u.p_cm_max, spec.points_per_axis) };
    let f_axis = if pinned.is_pinned(Pin::UavFrequency { n }) { vec![u.f_max] } else { axis(0.0, u.f_max, spec.points_per_axis) };
    let greedy = spec.trajectory == TrajectoryGrid::Greedy;
    let trajs = trajectories(config, n, spec, greedy)?;

    let power_slots = kk * tt;
    let per_traj = (p_axis.len() as u64).saturating_pow(power_slots as u32).saturating_mul(f_axis.len().pow(kk as u32) as u64);
    let total = per_traj.saturating_mul(trajs.len() as u64);
    if total > MAX_GRID_POINTS {
        return Err(Error::TooLarge(format!("{total} grid points for UAV {n} (cap {MAX_GRID_POINTS})")));
    }

    let mut dv = DecisionVector::zeros(&single);
    dv.p_bs.clone_from(&pinned.decision.p_bs);
    dv.f_bs.clone_from(&pinned.decision.f_bs);
    let mut best: Option<(f64, DecisionVector)> = None;
    let mut evaluated = 0u64;
    for traj in &trajs {
        for k in 0..kk {
            for t in 0..tt {
                dv.x[0][k][t] = traj[k][t][0];
                dv.y[0][k][t] = traj[k][t][1];
            }
        }
        // Trajectory candidates that break the speed limit are skipped wholesale.
        if !greedy {
            let moves_ok = check_feasibility(&single, &dv)?
                .iter()
                .all(|v| !matches!(v.constraint, crate::model::ConstraintRef::Displacement { .. }));
            if !moves_ok {
                continue;
            }
        }
        let mut p_idx = vec![0usize; power_slots];
        loop {
            for k in 0..kk {
                for t in 0..tt {
                    dv.p_cm[0][k][t] = p_axis[p_idx[k * tt + t]];
                }
            }
            let mut f_idx = vec![0usize; kk];
            loop {
                for k in 0..kk {
                    dv.f_uav[0][k] = f_axis[f_idx[k]];
                }
                evaluated += 1;
                // Zero power or frequency leaves the latency undefined: not a candidate.
                if let Ok((lat, _)) = evaluate(&single, &dv) {
                    let better = best.as_ref().is_none_or(|(b, _)| lat.t_total < *b);
                    if better && check_feasibility(&single, &dv)?.is_empty() {
                        best = Some((lat.t_total, dv.clone()));
                    }
                }
                if !advance(&mut f_idx, f_axis.len()) {
                    break;
                }
            }
            if !advance(&mut p_idx, p_axis.len()) {
                break;
            }
        }
    }
    let (objective, decision) =
        best.ok_or_else(|| Error::Grid(format!("no feasible grid point for UAV {n} among {evaluated}")))?;
    Ok(UavBest { objective, decision, evaluated })
}

/// Exhaustive grid search on a tiny instance.
///
/// With the BS block at its caps the UAVs interact only through the max in
/// each round's latency, and with a single round that max is minimized by
/// minimizing every UAV's own latency. Each UAV is therefore searched
/// separately and the results are combined.
pub fn grid_search(config: &ScenarioConfig, spec: &GridSpec) -> Result<GridResult> {
    config.validate()?;
    spec.check_instance(config)?;
    if config.rounds != 1 {
        return Err(Error::TooLarge("the oracle handles single-round instances only".into()));
    }
    let pinned = if spec.pin_slack_uavs {
        monotone_pin(config)?
    } else {
        let mut p = monotone_pin(config)?;
        p.pins.retain(|pin| !matches!(pin, Pin::CommPower { .. } | Pin::UavFrequency { .. }));
        p
    };
    let mut decision = pinned.decision.clone();
    let mut evaluated = 0;
    for n in 0..config.n_uavs() {
        let best = search_uav(config, n, spec, &pinned)?;
        debug!("UAV {n}: best {:.6e} s after {} points", best.objective, best.evaluated);
        evaluated += best.evaluated;
        let d = best.decision;
        decision.x[n] = d.x[0].clone();
        decision.y[n] = d.y[0].clone();
        decision.p_cm[n] = d.p_cm[0].clone();
        decision.p_se[n] = d.p_se[0].clone();
        decision.f_uav[n] = d.f_uav[0].clone();
    }
    let violations = check_feasibility(config, &decision)?;
    if let Some(v) = violations.first() {
        return Err(Error::Grid(format!("combined point violates {}", v.constraint)));
    }
    let mut pins = pinned.pins;
    if spec.trajectory == TrajectoryGrid::Disc {
        pins.retain(|p| !matches!(p, Pin::Trajectory { .. }));
    }
    Ok(GridResult {
        objective: total_latency(config, &decision)?,
        decision,
        points_per_axis: spec.points_per_axis,
        points_evaluated: evaluated,
        pins,
    })
}
