use log::debug;

use crate::convexify::SlackState;
use crate::error::{Error, Result};
use crate::model::{check_feasibility, evaluate_energy, DecisionVector, ScenarioConfig};

/// Fraction of `E_max` targeted when powers and frequencies are scaled down.
const ENERGY_MARGIN: f64 = 0.999;
const BISECTION_STEPS: usize = 60;

/// Straight flight from `initial_xy` to `final_xy` during the first round, then
/// hovering, with every power and frequency at half its maximum and no sensing
/// power.
pub fn straight_line_start(config: &ScenarioConfig) -> Result<DecisionVector> {
    config.validate()?;
    let tt = config.slots_per_round;
    let reach = config.max_step() * tt as f64;
    let mut dv = DecisionVector::zeros(config);
    for (n, u) in config.uavs.iter().enumerate() {
        let dx = u.final_xy[0] - u.initial_xy[0];
        let dy = u.final_xy[1] - u.initial_xy[1];
        let dist = dx.hypot(dy);
        if dist > reach * (1.0 + 1e-12) {
            return Err(Error::InfeasibleScenario(format!(
                "UAV {n}: endpoints are {dist:.3} m apart but one round covers at most {reach:.3} m"
            )));
        }
        for k in 0..config.rounds {
            for t in 0..tt {
                let frac = if k == 0 { (t + 1) as f64 / tt as f64 } else { 1.0 };
                dv.x[n][k][t] = u.initial_xy[0] + frac * dx;
                dv.y[n][k][t] = u.initial_xy[1] + frac * dy;
                dv.p_cm[n][k][t] = 0.5 * u.p_cm_max;
            }
            dv.p_se[n][k] = 0.0;
            dv.f_uav[n][k] = 0.5 * u.f_max;
        }
    }
    for k in 0..config.rounds {
        dv.p_bs[k] = 0.5 * config.p_bs_max;
        dv.f_bs[k] = 0.5 * config.f_bs_max;
    }
    Ok(dv)
}

fn scale_uav(base: &DecisionVector, n: usize, lambda: f64, dv: &mut DecisionVector) {
    for k in 0..base.f_uav[n].len() {
        dv.f_uav[n][k] = lambda * base.f_uav[n][k];
        for (p, b) in dv.p_cm[n][k].iter_mut().zip(&base.p_cm[n][k]) {
            *p = lambda * b;
        }
    }
}

/// Feasible starting point for Algorithm 1 with tight slacks.
///
/// Starts from [`straight_line_start`]; a UAV over its energy budget has its
/// CPU frequency and transmit power scaled down together by bisection.
pub fn init_feasible(config: &ScenarioConfig) -> Result<(DecisionVector, SlackState)> {
    let base = straight_line_start(config)?;
    let mut dv = base.clone();
    let budget = ENERGY_MARGIN * config.e_max;
    let energy = evaluate_energy(config, &dv)?;
    for n in 0..config.n_uavs() {
        if energy.e_total[n] <= budget {
            continue;
        }
        let mut probe = dv.clone();
        let mut energy_at = |lambda: f64| -> Result<f64> {
            scale_uav(&base, n, lambda, &mut probe);
            Ok(evaluate_energy(config, &probe)?.e_total[n])
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let floor = energy_at(1e-12)?;
        if floor > budget {
            return Err(Error::InfeasibleScenario(format!(
                "UAV {n} needs at least {floor:.4e} J on the initial trajectory, budget is {:.4e} J",
                config.e_max
            )));
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if energy_at(mid)? <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = lo.max(1e-12);
        debug!("UAV {n}: powers and frequency scaled by {lambda:.4} to meet the energy budget");
        scale_uav(&base, n, lambda, &mut dv);
    }
    let violations = check_feasibility(config, &dv)?;
    if let Some(v) = violations.first() {
        return Err(Error::InfeasibleScenario(format!("initial point violates {} by {:.3e}", v.constraint, v.excess)));
    }
    let slack = SlackState::tight(config, &dv)?;
    Ok((dv, slack))
}
