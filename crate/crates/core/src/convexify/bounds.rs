//! Scalar convex surrogates. Each is tight at its expansion point and
//! conservative everywhere else, which is what makes SCA iterations descend.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{sensing_time, training_energy, DecisionVector, ScenarioConfig};

use super::slack::{LinearizationPoint, SlackState};

/// Residual of the linearized product constraint `g·z >= payload`.
///
/// `g·z = ¼(g+z)² − ¼(g−z)²`; the convex `(g+z)²` is replaced by its tangent at
/// `(g_i, z_i)`. Non-negative residual means the restricted constraint holds.
pub fn taylor_gz_bound(g: f64, z: f64, g_i: f64, z_i: f64, payload: f64) -> f64 {
    let s_i = g_i + z_i;
    0.25 * (s_i * s_i + 2.0 * s_i * (g + z - s_i)) - payload - 0.25 * (g - z) * (g - z)
}

/// [`taylor_gz_bound`] after rescaling `g` and `z` so both equal `sqrt(g_i·z_i)`
/// at the expansion point. The product `g·z` is unchanged by the rescaling, but
/// the tangent error no longer mixes seconds with bits per second.
pub fn balanced_taylor_gz_bound(g: f64, z: f64, g_i: f64, z_i: f64, payload: f64) -> f64 {
    let rho = (z_i / g_i).sqrt();
    taylor_gz_bound(g * rho, z / rho, g_i * rho, z_i / rho, payload)
}

/// Lower bound on `ln(1+γ)` expanded at `γ_i`:
/// `ln(1+γ_i) + γ_i/(γ_i+1) − γ_i²/(γ_i+1)·(1/γ)`.
pub fn log_lower_bound(gamma: f64, gamma_i: f64) -> Result<f64> {
    if !(gamma > 0.0) || !(gamma_i > 0.0) {
        return Err(Error::Domain(format!(
            "log bound needs positive arguments, got gamma={gamma}, gamma_i={gamma_i}"
        )));
    }
    let (a, b) = log_bound_coefficients(gamma_i);
    Ok(a - b / gamma)
}

/// `(ln(1+γ_i) + γ_i/(γ_i+1), γ_i²/(γ_i+1))`, the affine-in-1/γ form of [`log_lower_bound`].
pub(crate) fn log_bound_coefficients(gamma_i: f64) -> (f64, f64) {
    let denom = gamma_i + 1.0;
    (gamma_i.ln_1p() + gamma_i / denom, gamma_i * gamma_i / denom)
}

/// Upper bound on `a·b` expanded at `(a_i, b_i)`: `½(b_i/a_i)a² + ½(a_i/b_i)b²`.
pub fn bilinear_upper_bound(a: f64, b: f64, a_i: f64, b_i: f64) -> Result<f64> {
    if !(a_i > 0.0) || !(b_i > 0.0) {
        return Err(Error::Domain(format!(
            "bilinear bound needs a positive expansion point, got ({a_i}, {b_i})"
        )));
    }
    Ok(0.5 * (b_i / a_i) * a * a + 0.5 * (a_i / b_i) * b * b)
}

/// `α − (x² + y² + h²)`; non-negative when the squared-distance slack is valid.
pub fn distance_slack_residual(x: f64, y: f64, h: f64, alpha: f64) -> f64 {
    alpha - (x * x + y * y + h * h)
}

/// Convex upper bound on the energy of UAV `n` over all rounds. The upload term
/// `Σ_t p·T_cm` is bounded through the slack `g ≥ T_cm` and the bilinear bound
/// on `g·p` expanded at the linearization point.
pub fn energy_surrogate(
    config: &ScenarioConfig,
    dv: &DecisionVector,
    slack: &SlackState,
    lp: &LinearizationPoint,
    n: usize,
) -> Result<f64> {
    let u = &config.uavs[n];
    let mut total = 0.0;
    for k in 0..config.rounds {
        total += dv.p_se[n][k] * sensing_time(config.unit_sense_time, u.samples[k]);
        total += training_energy(
            config.local_iters as f64,
            u.switch_cap[k],
            u.cycles_per_sample[k],
            u.samples[k],
            dv.f_uav[n][k],
        );
        for t in 0..config.slots_per_round {
            total += bilinear_upper_bound(
                slack.g[n][k][t],
                dv.p_cm[n][k][t],
                lp.slack.g[n][k][t],
                lp.dv.p_cm[n][k][t],
            )?;
        }
    }
    Ok(total)
}

/// Residual of the linearized downlink constraint `s_g/R_BS <= Θ` at BS power
/// `p_bs` and distance `d`, expanded at `p_bs_i`. Non-negative means feasible.
pub fn downlink_log_bound(theta: f64, p_bs: f64, d: f64, p_bs_i: f64, config: &ScenarioConfig) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be > 0, got {d}")));
    }
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("downlink slack must be > 0, got {theta}")));
    }
    let g0 = config.gamma0();
    let xi = g0 * p_bs / (d * d);
    let xi_i = g0 * p_bs_i / (d * d);
    Ok(log_lower_bound(xi, xi_i)? - config.model_size_down * LN_2 / (config.bw_bs * theta))
}

/// Residual of the download-time constraint seen from the UAV side: BS power
/// fixed, squared distance bounded by the slack `α`, expanded at `α_i`. The log
/// bound is affine in `α` because `1/ξ = α/(γ₀·p_bs)`.
pub fn downlink_distance_bound(
    theta: f64,
    alpha: f64,
    alpha_i: f64,
    p_bs: f64,
    config: &ScenarioConfig,
) -> Result<f64> {
    if !(alpha > 0.0) || !(alpha_i > 0.0) || !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "downlink distance bound needs positive arguments, got theta={theta}, alpha={alpha}, alpha_i={alpha_i}"
        )));
    }
    let g0 = config.gamma0();
    Ok(log_lower_bound(g0 * p_bs / alpha, g0 * p_bs / alpha_i)?
        - config.model_size_down * LN_2 / (config.bw_bs * theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn taylor_examples() {
        assert!((taylor_gz_bound(0.3, 2.0, 0.3, 2.0, 0.5) - (0.3 * 2.0 - 0.5)).abs() < 1e-15);
        assert_eq!(taylor_gz_bound(1.0, 1.0, 1.0, 1.0, 0.0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let (g, z, gi, zi): (f64, f64, f64, f64) =
                (rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0));
            let p = rng.gen_range(0.0..5.0);
            assert!(taylor_gz_bound(g, z, gi, zi, p) <= g * z - p + 1e-12);
            assert!(balanced_taylor_gz_bound(g, z * 1e6, gi, zi * 1e6, p) <= g * z * 1e6 - p + 1e-6);
        }
    }

    #[test]
    fn log_bound_examples() {
        assert!((log_lower_bound(0.7, 0.7).unwrap() - 0.7f64.ln_1p()).abs() < 1e-15);
        // γ_i = 1, γ → ∞: ln 2 + 1/2
        let limit = log_lower_bound(1e15, 1.0).unwrap();
        assert!((limit - (2f64.ln() + 0.5)).abs() < 1e-12);
        assert!((limit - 1.193_147_180_559_945).abs() < 1e-12);
        assert!(log_lower_bound(0.0, 1.0).is_err());
        assert!(log_lower_bound(1.0, -1.0).is_err());
    }

    #[test]
    fn bilinear_examples() {
        assert_eq!(bilinear_upper_bound(1.5, 4.0, 1.5, 4.0).unwrap(), 6.0);
        assert_eq!(bilinear_upper_bound(2.0, 0.5, 1.0, 1.0).unwrap(), 2.125);
        assert!(bilinear_upper_bound(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn distance_slack_examples() {
        assert_eq!(distance_slack_residual(3.0, 4.0, 12.0, 169.0), 0.0);
        assert_eq!(distance_slack_residual(3.0, 4.0, 12.0, 170.0), 1.0);
        // 10² + 20² + 30² = 1400
        assert_eq!(distance_slack_residual(10.0, -20.0, 30.0, 1500.0), 100.0);
    }
}
