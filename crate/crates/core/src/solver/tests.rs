use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::convexify::{
    build_subproblem2, Affine, ConstraintKind, ConstraintOrigin, ConvexFn, ConvexSubproblem, LinearizationPoint,
    SubproblemKind, VarRole,
};
use crate::model::{check_feasibility, total_latency};
use crate::scenarios::{default_scenario, random_scenario, tiny_scenario, SizeCaps};

fn strip_wall_time(trace: &OptimizationTrace) -> Vec<TraceRow> {
    trace.rows.iter().cloned().map(|r| TraceRow { wall_ms: 0.0, ..r }).collect()
}

#[test]
fn box_toy_goes_to_the_upper_bound() {
    let f_max = 2e9;
    let mut sp = ConvexSubproblem::new(SubproblemKind::Bs);
    let f = sp.add_var(VarRole::BsFrequency { k: 0 }, f_max, 0.5 * f_max, None);
    sp.objective.push((f, -1.0));
    sp.push_box(f, 0.0, f_max);
    let res = solve_convex(&sp, &SolveSettings::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal);
    assert!((res.values[0] - f_max).abs() <= 1e-7 * f_max);
    assert!(res.kkt_residual <= 1e-8);
}

/// `min ‖u − c‖²` over a box, as an epigraph program; the answer is the clamp.
#[test]
fn box_projection_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let dim = rng.gen_range(1..8);
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..0.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.5..2.0)).collect();
        let mut sp = ConvexSubproblem::new(SubproblemKind::Bs);
        let xs: Vec<usize> = (0..dim)
            .map(|j| sp.add_var(VarRole::BsPower { k: j }, 1.0, 0.5 * (lo[j] + hi[j]), Some(0)))
            .collect();
        let start_obj: f64 = (0..dim).map(|j| (0.5 * (lo[j] + hi[j]) - c[j]).powi(2)).sum();
        let tau = sp.add_var(VarRole::Epigraph { k: 0 }, 1.0, start_obj + 1.0, None);
        sp.objective.push((tau, 1.0));
        let f = ConvexFn {
            linear: vec![(tau, -1.0)],
            squares: xs.iter().map(|&j| (1.0, Affine { terms: vec![(j, 1.0)], offset: -c[j] })).collect(),
            ..Default::default()
        };
        sp.push(ConstraintKind::ConvexQuadratic, ConstraintOrigin::Epigraph { n: 0, k: 0 }, f);
        for j in 0..dim {
            sp.push_box(xs[j], lo[j], hi[j]);
        }
        let res = solve_convex(&sp, &SolveSettings::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        let mut expected_obj = 0.0;
        for j in 0..dim {
            let proj = c[j].clamp(lo[j], hi[j]);
            expected_obj += (proj - c[j]).powi(2);
            assert!((res.values[xs[j]] - proj).abs() < 1e-6, "{} vs {proj}", res.values[xs[j]]);
        }
        assert!((res.objective - expected_obj).abs() < 1e-6);
    }
}

#[test]
fn empty_feasible_set_reports_infeasible() {
    let mut sp = ConvexSubproblem::new(SubproblemKind::Bs);
    let x = sp.add_var(VarRole::BsPower { k: 0 }, 1.0, 0.5, Some(0));
    sp.objective.push((x, 1.0));
    sp.push_box(x, 0.0, 1.0);
    // x >= 2
    let f = ConvexFn { constant: 2.0, linear: vec![(x, -1.0)], ..Default::default() };
    sp.push(ConstraintKind::Affine, ConstraintOrigin::Epigraph { n: 0, k: 0 }, f);
    let res = solve_convex(&sp, &SolveSettings::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Infeasible);
}

#[test]
fn bs_subproblem_saturates_power_and_frequency() {
    let config = default_scenario();
    let (dv, _) = init_feasible(&config).unwrap();
    let lp = LinearizationPoint::new(&config, &dv).unwrap();
    let sp = build_subproblem2(&config, &lp).unwrap();
    let res = solve_convex(&sp, &SolveSettings::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal);
    // Latency is flat near the caps, so the barrier stops slightly inside them;
    // the objective still matches the value at the caps.
    for k in 0..config.rounds {
        let p = res.values[sp.var(VarRole::BsPower { k }).unwrap()];
        let f = res.values[sp.var(VarRole::BsFrequency { k }).unwrap()];
        assert!((p - config.p_bs_max).abs() <= 1e-4 * config.p_bs_max, "p_bs[{k}] = {p}");
        assert!((f - config.f_bs_max).abs() <= 1e-4 * config.f_bs_max, "f_bs[{k}] = {f}");
    }
    let mut at_caps = dv.clone();
    at_caps.p_bs.fill(config.p_bs_max);
    at_caps.f_bs.fill(config.f_bs_max);
    let best = total_latency(&config, &at_caps).unwrap();
    let mut next = dv.clone();
    sp.write_decisions(&res.values, &mut next);
    let truth = total_latency(&config, &next).unwrap();
    assert!((truth - best).abs() <= 1e-6 * best, "{truth} vs {best}");
    // The sub-problem value bounds the directly evaluated latency from above;
    // the log bound was expanded at half power, so the two differ slightly.
    let surrogate = sp.surrogate_objective(&res.scaled);
    assert!(truth <= surrogate * (1.0 + 1e-12));
    assert!(surrogate - truth <= 1e-2 * truth);
}

#[test]
fn initialization_examples() {
    let config = default_scenario();
    let (dv, slack) = init_feasible(&config).unwrap();
    assert!(check_feasibility(&config, &dv).unwrap().is_empty());
    assert!(slack.g.iter().flatten().flatten().all(|g| *g > 0.0));

    let mut still = tiny_scenario();
    still.uavs[0].final_xy = still.uavs[0].initial_xy;
    let (dv, _) = init_feasible(&still).unwrap();
    assert!(dv.x[0][0].iter().all(|x| *x == still.uavs[0].initial_xy[0]));

    let mut broke = default_scenario();
    broke.e_max = 0.0;
    assert!(matches!(init_feasible(&broke), Err(crate::Error::InfeasibleScenario(_))));

    let mut far = tiny_scenario();
    far.uavs[0].final_xy = [5000.0, 0.0];
    assert!(matches!(init_feasible(&far), Err(crate::Error::InfeasibleScenario(_))));
}

#[test]
fn tight_budget_scales_the_start_down() {
    let mut config = default_scenario();
    let base = straight_line_start(&config).unwrap();
    let e = crate::model::evaluate_energy(&config, &base).unwrap();
    config.e_max = 0.5 * e.e_total.iter().cloned().fold(0.0, f64::max);
    let (dv, _) = init_feasible(&config).unwrap();
    assert!(check_feasibility(&config, &dv).unwrap().is_empty());
    assert!(dv.f_uav.iter().flatten().zip(base.f_uav.iter().flatten()).any(|(a, b)| a < b));
}

#[test]
fn default_scenario_converges_with_descent() {
    let config = default_scenario();
    let settings = SolveSettings::default();
    let trace = run_algorithm1(&config, &settings).unwrap();
    assert_eq!(trace.status, BcdStatus::Converged);
    assert!(trace.iterations() <= 20);
    let mut prev = trace.initial_objective;
    for r in &trace.rows {
        assert!(r.true_objective <= prev * (1.0 + 1e-6));
        assert_eq!(r.max_violation, 0.0);
        prev = r.true_objective;
    }
    assert!(check_feasibility(&config, &trace.final_decision).unwrap().is_empty());

    // Restarting at the converged point is a fixed point.
    let again = run_from(&config, trace.final_decision.clone(), Scheme::Joint, &settings).unwrap();
    assert_eq!(again.iterations(), 1);
    assert_eq!(again.status, BcdStatus::Converged);
    let change = (again.final_objective() - trace.final_objective()).abs();
    assert!(change < settings.bcd_tol * trace.final_objective());
}

#[test]
fn schemes_are_ordered_on_the_default_scenario() {
    let config = default_scenario();
    let settings = SolveSettings::default();
    let joint = run_scheme(&config, Scheme::Joint, &settings).unwrap();
    let uav_only = run_scheme(&config, Scheme::Scheme1, &settings).unwrap();
    let bs_only = run_scheme(&config, Scheme::Scheme2, &settings).unwrap();
    assert!(joint.final_objective() < uav_only.final_objective());
    assert!(uav_only.final_objective() < bs_only.final_objective());
    // Pinned blocks really stay pinned.
    assert_eq!(uav_only.final_decision.p_bs, vec![0.5 * config.p_bs_max; config.rounds]);
    let (start, _) = init_feasible(&config).unwrap();
    assert_eq!(bs_only.final_decision.x, start.x);
    assert_eq!(bs_only.final_decision.f_uav, start.f_uav);
    assert!(!uav_only.pinned.is_empty() && !bs_only.pinned.is_empty());
}

#[test]
fn runs_are_deterministic() {
    let config = random_scenario(4, SizeCaps { max_uavs: 3, max_rounds: 2, max_slots: 4 });
    let settings = SolveSettings::default();
    let a = run_algorithm1(&config, &settings).unwrap();
    let b = run_algorithm1(&config, &settings).unwrap();
    assert_eq!(strip_wall_time(&a), strip_wall_time(&b));
    assert_eq!(a.final_decision, b.final_decision);
}

#[test]
fn random_scenarios_descend() {
    let settings = SolveSettings::default();
    for seed in 0..5 {
        let config = random_scenario(seed, SizeCaps { max_uavs: 3, max_rounds: 2, max_slots: 4 });
        let trace = run_algorithm1(&config, &settings).unwrap();
        assert_ne!(trace.status, BcdStatus::MaxIters);
        let mut prev = trace.initial_objective;
        for r in &trace.rows {
            assert!(r.true_objective <= prev * (1.0 + 1e-6), "seed {seed}");
            prev = r.true_objective;
        }
        assert!(trace.final_objective() <= total_latency(&config, &init_feasible(&config).unwrap().0).unwrap());
    }
}

#[test]
fn settings_are_validated() {
    assert!(SolveSettings::default().validate().is_ok());
    let bad = SolveSettings { kkt_tol: 0.0, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = SolveSettings { max_bcd_iters: 0, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = SolveSettings { barrier_mu: 1.0, ..Default::default() };
    assert!(bad.validate().is_err());
}
