use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{check_feasibility, download_distance, downlink_rate, evaluate, evaluate_energy, total_latency, ScenarioConfig};
use crate::scenarios::{default_scenario, random_scenario, tiny_scenario, SizeCaps};
use crate::solver::{init_feasible, solve_convex, SolveSettings};

const CAPS: SizeCaps = SizeCaps { max_uavs: 3, max_rounds: 2, max_slots: 3 };

fn point(config: &ScenarioConfig) -> LinearizationPoint {
    let (dv, _) = init_feasible(config).unwrap();
    LinearizationPoint::new(config, &dv).unwrap()
}

fn functions(sp: &ConvexSubproblem) -> impl Iterator<Item = (&ConstraintOrigin, &ConvexFn)> {
    sp.constraints.iter().filter_map(|c| match &c.body {
        ConstraintBody::Function(f) => Some((&c.origin, f)),
        ConstraintBody::Box { .. } => None,
    })
}

#[test]
fn slack_constraints_touch_at_the_linearization_point() {
    for seed in 0..20 {
        let config = random_scenario(seed, CAPS);
        let lp = point(&config);
        let sp = build_subproblem1(&config, &lp).unwrap();
        let u0 = sp.start();
        let (_, energy) = evaluate(&config, &lp.dv).unwrap();
        for (origin, f) in functions(&sp) {
            let v = f.eval(&u0);
            match origin {
                ConstraintOrigin::RateProduct { .. }
                | ConstraintOrigin::RateLog { .. }
                | ConstraintOrigin::SnrProduct { .. }
                | ConstraintOrigin::DistanceSlack { .. }
                | ConstraintOrigin::DownlinkDistance { .. } => {
                    assert!(v.abs() < 1e-9, "seed {seed}: {origin:?} = {v:e}")
                }
                ConstraintOrigin::Epigraph { .. } => assert!(v < 1e-9, "seed {seed}: {origin:?} = {v:e}"),
                ConstraintOrigin::Energy { n } => {
                    let expected = (energy.e_total[*n] - config.e_max) / config.e_max;
                    assert!((v - expected).abs() < 1e-9, "seed {seed}: energy {v:e} vs {expected:e}");
                }
                _ => {}
            }
        }
    }
}

#[test]
fn surrogate_objectives_touch_the_true_objective() {
    for seed in 0..20 {
        let config = random_scenario(seed, CAPS);
        let lp = point(&config);
        let truth = total_latency(&config, &lp.dv).unwrap();
        for sp in [build_subproblem1(&config, &lp).unwrap(), build_subproblem2(&config, &lp).unwrap()] {
            let s = sp.surrogate_objective(&sp.start());
            assert!((s - truth).abs() <= 1e-9 * truth, "seed {seed} {:?}: {s} vs {truth}", sp.kind);
            assert!((sp.objective_value(&sp.start()) - truth).abs() <= 1e-9 * truth);
        }
    }
}

#[test]
fn energy_surrogate_is_tight_and_conservative() {
    let config = default_scenario();
    let lp = point(&config);
    let e = evaluate_energy(&config, &lp.dv).unwrap();
    for n in 0..config.n_uavs() {
        let at_lp = energy_surrogate(&config, &lp.dv, &lp.slack, &lp, n).unwrap();
        assert!((at_lp - e.e_total[n]).abs() <= 1e-9 * e.e_total[n]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2_000 {
        let mut dv = lp.dv.clone();
        for (n, u) in config.uavs.iter().enumerate() {
            for k in 0..config.rounds {
                dv.f_uav[n][k] = rng.gen_range(0.01..1.0) * u.f_max;
                for t in 0..config.slots_per_round {
                    dv.p_cm[n][k][t] = rng.gen_range(0.01..1.0) * u.p_cm_max;
                }
            }
        }
        let mut slack = SlackState::tight(&config, &dv).unwrap();
        // Any g above the per-slot upload time is admissible.
        for g in slack.g.iter_mut().flatten().flatten() {
            *g *= rng.gen_range(1.0..2.0);
        }
        let e = evaluate_energy(&config, &dv).unwrap();
        for n in 0..config.n_uavs() {
            let s = energy_surrogate(&config, &dv, &slack, &lp, n).unwrap();
            assert!(s >= e.e_total[n] * (1.0 - 1e-12));
        }
    }

    let mut idle = lp.dv.clone();
    for p in idle.p_cm.iter_mut().flatten().flatten() {
        *p = 0.0;
    }
    for p in idle.p_se.iter_mut().flatten() {
        *p = 0.0;
    }
    let only_training = energy_surrogate(&config, &idle, &lp.slack, &lp, 0).unwrap();
    let u = &config.uavs[0];
    let expected: f64 = (0..config.rounds)
        .map(|k| {
            config.local_iters as f64 * u.switch_cap[k] * u.cycles_per_sample[k] * u.samples[k] * idle.f_uav[0][k].powi(2)
        })
        .sum();
    // Zero power leaves only the g² half of each bilinear term besides training.
    let g_part: f64 = (0..config.rounds)
        .flat_map(|k| (0..config.slots_per_round).map(move |t| (k, t)))
        .map(|(k, t)| 0.5 * lp.dv.p_cm[0][k][t] * lp.slack.g[0][k][t])
        .sum();
    assert!((only_training - expected - g_part).abs() <= 1e-12 * only_training);
}

#[test]
fn downlink_bounds_are_tight_and_sound() {
    let config = default_scenario();
    let g0 = config.gamma0();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let d: f64 = rng.gen_range(100.0..800.0);
        let p_i = rng.gen_range(0.01..1.0) * config.p_bs_max;
        let p = rng.gen_range(0.01..1.0) * config.p_bs_max;
        let theta_i = config.model_size_down / downlink_rate(p_i, d, config.bw_bs, g0).unwrap();
        let tight = downlink_log_bound(theta_i, p_i, d, p_i, &config).unwrap();
        assert!(tight.abs() < 1e-9);
        let theta = theta_i * rng.gen_range(0.3..3.0);
        if downlink_log_bound(theta, p, d, p_i, &config).unwrap() >= 0.0 {
            let truth = config.model_size_down / downlink_rate(p, d, config.bw_bs, g0).unwrap();
            assert!(truth <= theta * (1.0 + 1e-12));
        }

        let alpha_i = d * d;
        let alpha = alpha_i * rng.gen_range(0.3..3.0);
        let tight = downlink_distance_bound(theta_i, alpha_i, alpha_i, p_i, &config).unwrap();
        assert!(tight.abs() < 1e-9);
        if downlink_distance_bound(theta, alpha, alpha_i, p_i, &config).unwrap() >= 0.0 {
            let truth = config.model_size_down / downlink_rate(p_i, alpha.sqrt(), config.bw_bs, g0).unwrap();
            assert!(truth <= theta * (1.0 + 1e-12));
        }
    }
    // Unbounded download slack leaves only the log term.
    let d = 300.0;
    let r = downlink_log_bound(1e300, 0.5, d, 0.5, &config).unwrap();
    assert!((r - (g0 * 0.5 / (d * d)).ln_1p()).abs() < 1e-12);
}

#[test]
fn scalar_bounds_hold_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let (a, b, ai, bi): (f64, f64, f64, f64) =
            (rng.gen_range(1e-3..1e3), rng.gen_range(1e-3..1e3), rng.gen_range(1e-3..1e3), rng.gen_range(1e-3..1e3));
        let ub = bilinear_upper_bound(a, b, ai, bi).unwrap();
        assert!(ub >= a * b * (1.0 - 1e-12));
        assert!((bilinear_upper_bound(ai, bi, ai, bi).unwrap() - ai * bi).abs() <= 1e-12 * ai * bi);
        let lb = log_lower_bound(a, ai).unwrap();
        assert!(lb <= a.ln_1p() + 1e-12);
    }
}

#[test]
fn hand_count_for_one_uav_one_round_one_slot() {
    let mut config = tiny_scenario();
    config.slots_per_round = 1;
    config.uavs[0].final_xy = config.uavs[0].initial_xy;
    let lp = point(&config);
    let sp = build_subproblem1(&config, &lp).unwrap();
    // τ ≥ latency, download bound, the four slack links, displacement, energy,
    // and boxes on p_cm, p_se, f.
    assert_eq!(sp.constraints.len(), 11);
    let counts = sp.count_by_kind();
    assert_eq!(counts[&ConstraintKind::Epigraph], 1);
    assert_eq!(counts[&ConstraintKind::LogConcaveBound], 2);
    assert_eq!(counts[&ConstraintKind::ConvexQuadratic], 5);
    assert_eq!(counts[&ConstraintKind::Box], 3);
    // x, y, p, g, z, γ, α, p_se, f, θ, τ
    assert_eq!(sp.n_vars(), 11);
    sp.audit().unwrap();

    let sp2 = build_subproblem2(&config, &lp).unwrap();
    assert_eq!(sp2.constraints.len(), 4);
    assert_eq!(sp2.n_vars(), 4);
}

#[test]
fn infeasible_linearization_point_is_rejected() {
    let config = default_scenario();
    let (mut dv, _) = init_feasible(&config).unwrap();
    dv.f_uav[0][0] = 2.0 * config.uavs[0].f_max;
    assert!(matches!(LinearizationPoint::new(&config, &dv), Err(crate::Error::BadLinearizationPoint(_))));
    let mut lp = point(&config);
    lp.slack.z[1][0][0] = 0.0;
    assert!(build_subproblem1(&config, &lp).is_err());
}

#[test]
fn zero_powers_are_nudged() {
    let config = default_scenario();
    let (dv, _) = init_feasible(&config).unwrap();
    assert_eq!(dv.p_se[0][0], 0.0);
    let lp = LinearizationPoint::new(&config, &dv).unwrap();
    assert_eq!(lp.dv.p_se[0][0], ZERO_NUDGE * config.uavs[0].p_se_max);
}

/// Points feasible for the convex restriction map back to feasible schedules
/// whose true latency the surrogate over-estimates.
#[test]
fn restriction_round_trip_is_sound() {
    let settings = SolveSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..10 {
        let config = random_scenario(100 + seed, CAPS);
        let lp = point(&config);
        for sp in [build_subproblem1(&config, &lp).unwrap(), build_subproblem2(&config, &lp).unwrap()] {
            let sol = solve_convex(&sp, &settings).unwrap();
            let u0 = sp.start();
            let mut checked = 0;
            for i in 0..200 {
                let u: Vec<f64> = if i % 2 == 0 {
                    let th = rng.gen_range(0.0..=1.0);
                    u0.iter().zip(&sol.scaled).map(|(a, b)| a + th * (b - a)).collect()
                } else {
                    sol.scaled.iter().map(|v| v * (1.0 + rng.gen_range(-1e-4..1e-4))).collect()
                };
                let inside = sp.constraints.iter().all(|c| match &c.body {
                    ConstraintBody::Box { var, lo, hi } => u[*var] >= *lo && u[*var] <= *hi,
                    ConstraintBody::Function(f) => f.eval(&u) <= 0.0,
                });
                if !inside {
                    continue;
                }
                checked += 1;
                let mut dv = lp.dv.clone();
                sp.write_decisions(&sp.to_physical(&u), &mut dv);
                assert!(check_feasibility(&config, &dv).unwrap().is_empty(), "seed {seed}");
                let truth = total_latency(&config, &dv).unwrap();
                let bound = sp.surrogate_objective(&u);
                assert!(truth <= bound * (1.0 + 1e-9), "seed {seed}: {truth} > {bound}");
            }
            assert!(checked > 50, "seed {seed}: only {checked} feasible samples");
        }
    }
}

#[test]
fn sub2_freezes_download_distance_at_last_slot() {
    let config = default_scenario();
    let lp = point(&config);
    let sp = build_subproblem2(&config, &lp).unwrap();
    let d = download_distance(&config, &lp.dv, 2, 1);
    let tt = config.slots_per_round;
    let d2 = lp.dv.x[2][1][tt - 1].powi(2) + lp.dv.y[2][1][tt - 1].powi(2) + config.altitude.powi(2);
    assert!((d * d - d2).abs() <= 1e-12 * d2);
    assert!(sp.var(VarRole::DownloadSlack { n: 2, k: 1 }).is_some());
    assert!(sp.var(VarRole::X { n: 0, k: 0, t: 0 }).is_none());
}
