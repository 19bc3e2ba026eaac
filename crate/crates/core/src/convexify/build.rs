use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{aggregation_time, check_feasibility, evaluate, ScenarioConfig};

use super::bounds::log_bound_coefficients;
use super::problem::{
    Affine, ConstraintKind as Kind, ConstraintOrigin as Origin, ConvexFn, ConvexSubproblem, SubproblemKind, VarRole,
    Variable,
};
use super::slack::LinearizationPoint;

/// Accumulates a [`ConvexFn`] from coefficients on physical variables.
struct Terms<'a> {
    vars: &'a [Variable],
    f: ConvexFn,
}

impl<'a> Terms<'a> {
    fn new(vars: &'a [Variable]) -> Self {
        Terms { vars, f: ConvexFn::default() }
    }

    fn constant(&mut self, c: f64) -> &mut Self {
        self.f.constant += c;
        self
    }

    fn lin(&mut self, j: usize, coef: f64) -> &mut Self {
        self.f.linear.push((j, coef * self.vars[j].scale));
        self
    }

    /// `w·(Σ c·v[j] + offset)²`.
    fn square(&mut self, w: f64, terms: &[(usize, f64)], offset: f64) -> &mut Self {
        let terms = terms.iter().map(|&(j, c)| (j, c * self.vars[j].scale)).collect();
        self.f.squares.push((w, Affine { terms, offset }));
        self
    }

    /// `coef / v[j]`.
    fn recip(&mut self, j: usize, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.f.reciprocals.push((j, coef / self.vars[j].scale));
        }
        self
    }

    fn normalized(&mut self, norm: f64) -> ConvexFn {
        std::mem::take(&mut self.f).scaled(1.0 / norm)
    }
}

fn check_point(config: &ScenarioConfig, lp: &LinearizationPoint) -> Result<()> {
    config.validate()?;
    lp.dv.check_dims(config)?;
    let violations = check_feasibility(config, &lp.dv)?;
    if let Some(v) = violations.first() {
        return Err(Error::BadLinearizationPoint(format!("{} violated by {:.3e}", v.constraint, v.excess)));
    }
    let positive = |v: &f64| v.is_finite() && *v > 0.0;
    let s = &lp.slack;
    let slack_ok = s.g.iter().flatten().flatten().all(positive)
        && s.z.iter().flatten().flatten().all(positive)
        && s.gamma.iter().flatten().flatten().all(positive)
        && s.alpha.iter().flatten().flatten().all(positive)
        && s.theta.iter().flatten().all(positive);
    let dv = &lp.dv;
    let dv_ok = dv.p_cm.iter().flatten().flatten().all(positive)
        && dv.f_uav.iter().flatten().all(positive)
        && dv.p_bs.iter().all(positive)
        && dv.f_bs.iter().all(positive);
    if !(slack_ok && dv_ok) {
        return Err(Error::BadLinearizationPoint(
            "powers, frequencies and slacks must be strictly positive".into(),
        ));
    }
    Ok(())
}

/// UAV-block sub-problem: trajectory, sensing/communication power and CPU
/// frequency, with the BS block frozen at `lp`.
///
/// The per-slot upload time enters through the slack chain
/// `s_l/T <= g·z`, `z <= B·log2(1+γ)`, `γ·α <= γ₀·p`, `x²+y²+H² <= α`, each
/// non-convex link replaced by its SCA restriction. The download time keeps the
/// frozen BS power but follows the last-slot squared-distance slack through the
/// same log bound, so moving the UAV is never rewarded with a stale download time.
pub fn build_subproblem1(config: &ScenarioConfig, lp: &LinearizationPoint) -> Result<ConvexSubproblem> {
    check_point(config, lp)?;
    let (nn, kk, tt) = (config.n_uavs(), config.rounds, config.slots_per_round);
    let dv = &lp.dv;
    let sl = &lp.slack;
    let g0 = config.gamma0();
    let payload = config.payload_per_slot();
    let h2 = config.altitude * config.altitude;
    let step2 = config.max_step() * config.max_step();
    let s_iters = config.local_iters as f64;
    let xy_scale = config.altitude.max(config.max_step());
    let dl_numer = config.model_size_down * LN_2 / config.bw_bs;

    let t_agg: Vec<f64> = (0..kk)
        .map(|k| aggregation_time(config.cycles_per_sample_bs[k], config.agg_samples[k], dv.f_bs[k]))
        .collect::<Result<_>>()?;
    let uav_sum = |n: usize, k: usize| {
        let u = &config.uavs[n];
        config.unit_sense_time * u.samples[k]
            + s_iters * u.cycles_per_sample[k] * u.samples[k] / dv.f_uav[n][k]
            + sl.g[n][k].iter().sum::<f64>()
            + t_agg[k]
            + sl.theta[n][k]
    };
    let tau_lp: Vec<f64> = (0..kk).map(|k| (0..nn).map(|n| uav_sum(n, k)).fold(0.0, f64::max)).collect();

    let mut sp = ConvexSubproblem::new(SubproblemKind::Uav);
    let var = |sp: &ConvexSubproblem, role| sp.var(role).expect("variable registered");
    for n in 0..nn {
        let b = Some(n);
        let u = &config.uavs[n];
        for k in 0..kk {
            for t in 0..tt {
                sp.add_var(VarRole::X { n, k, t }, xy_scale, dv.x[n][k][t], b);
                sp.add_var(VarRole::Y { n, k, t }, xy_scale, dv.y[n][k][t], b);
                sp.add_var(VarRole::CommPower { n, k, t }, u.p_cm_max, dv.p_cm[n][k][t], b);
                sp.add_var(VarRole::UploadSlack { n, k, t }, sl.g[n][k][t], sl.g[n][k][t], b);
                sp.add_var(VarRole::RateSlack { n, k, t }, sl.z[n][k][t], sl.z[n][k][t], b);
                sp.add_var(VarRole::SnrSlack { n, k, t }, sl.gamma[n][k][t], sl.gamma[n][k][t], b);
                sp.add_var(VarRole::DistanceSlack { n, k, t }, sl.alpha[n][k][t], sl.alpha[n][k][t], b);
            }
            sp.add_var(VarRole::SensePower { n, k }, u.p_se_max, dv.p_se[n][k], b);
            sp.add_var(VarRole::UavFrequency { n, k }, u.f_max, dv.f_uav[n][k], b);
            sp.add_var(VarRole::DownloadSlack { n, k }, sl.theta[n][k], sl.theta[n][k], b);
        }
    }
    for k in 0..kk {
        let j = sp.add_var(VarRole::Epigraph { k }, tau_lp[k], tau_lp[k], None);
        sp.objective.push((j, tau_lp[k]));
    }

    let vars = sp.variables.clone();
    let mut terms = Terms::new(&vars);
    for n in 0..nn {
        let u = &config.uavs[n];
        let mut energy = Terms::new(&vars);
        energy.constant(-config.e_max);
        for k in 0..kk {
            let f = var(&sp, VarRole::UavFrequency { n, k });
            let p_se = var(&sp, VarRole::SensePower { n, k });
            let theta = var(&sp, VarRole::DownloadSlack { n, k });
            let tau = var(&sp, VarRole::Epigraph { k });
            let work = s_iters * u.cycles_per_sample[k] * u.samples[k];

            let epi = terms
                .constant(config.unit_sense_time * u.samples[k] + t_agg[k])
                .recip(f, work)
                .lin(theta, 1.0)
                .lin(tau, -1.0);
            for t in 0..tt {
                epi.lin(var(&sp, VarRole::UploadSlack { n, k, t }), 1.0);
            }
            let epi = epi.normalized(tau_lp[k]);
            sp.push(Kind::Epigraph, Origin::Epigraph { n, k }, epi);

            // Download time with BS power frozen, distance through the last-slot α.
            let alpha_last = var(&sp, VarRole::DistanceSlack { n, k, t: tt - 1 });
            let xi_i = g0 * dv.p_bs[k] / sl.alpha[n][k][tt - 1];
            let (a, bc) = log_bound_coefficients(xi_i);
            let dl = terms
                .recip(theta, dl_numer)
                .constant(-a)
                .lin(alpha_last, bc / (g0 * dv.p_bs[k]))
                .normalized(xi_i.ln_1p());
            sp.push(Kind::LogConcaveBound, Origin::DownlinkDistance { n, k }, dl);

            energy
                .lin(p_se, config.unit_sense_time * u.samples[k])
                .square(s_iters * u.switch_cap[k] * u.cycles_per_sample[k] * u.samples[k], &[(f, 1.0)], 0.0);

            for t in 0..tt {
                let (x, y) = (var(&sp, VarRole::X { n, k, t }), var(&sp, VarRole::Y { n, k, t }));
                let p = var(&sp, VarRole::CommPower { n, k, t });
                let g = var(&sp, VarRole::UploadSlack { n, k, t });
                let z = var(&sp, VarRole::RateSlack { n, k, t });
                let gamma = var(&sp, VarRole::SnrSlack { n, k, t });
                let alpha = var(&sp, VarRole::DistanceSlack { n, k, t });
                let (g_i, z_i, gamma_i, alpha_i) =
                    (sl.g[n][k][t], sl.z[n][k][t], sl.gamma[n][k][t], sl.alpha[n][k][t]);

                // Linearized g·z >= payload on the balanced pair (ρg, z/ρ).
                let rho = (z_i / g_i).sqrt();
                let s_i = 2.0 * (g_i * z_i).sqrt();
                let rp = terms
                    .constant(0.25 * s_i * s_i + payload)
                    .lin(g, -0.5 * s_i * rho)
                    .lin(z, -0.5 * s_i / rho)
                    .square(0.25, &[(g, rho), (z, -1.0 / rho)], 0.0)
                    .normalized(g_i * z_i);
                sp.push(Kind::ConvexQuadratic, Origin::RateProduct { n, k, t }, rp);

                let (a, bc) = log_bound_coefficients(gamma_i);
                let rl = terms
                    .lin(z, LN_2 / u.bandwidth)
                    .constant(-a)
                    .recip(gamma, bc)
                    .normalized(gamma_i.ln_1p());
                sp.push(Kind::LogConcaveBound, Origin::RateLog { n, k, t }, rl);

                let snr = terms
                    .square(0.5 * gamma_i / alpha_i, &[(alpha, 1.0)], 0.0)
                    .square(0.5 * alpha_i / gamma_i, &[(gamma, 1.0)], 0.0)
                    .lin(p, -g0)
                    .normalized(alpha_i * gamma_i);
                sp.push(Kind::ConvexQuadratic, Origin::SnrProduct { n, k, t }, snr);

                let ds = terms
                    .square(1.0, &[(x, 1.0)], 0.0)
                    .square(1.0, &[(y, 1.0)], 0.0)
                    .constant(h2)
                    .lin(alpha, -1.0)
                    .normalized(alpha_i);
                sp.push(Kind::ConvexQuadratic, Origin::DistanceSlack { n, k, t }, ds);

                let disp = if t > 0 || k > 0 {
                    let (pk, pt) = if t > 0 { (k, t - 1) } else { (k - 1, tt - 1) };
                    let px = var(&sp, VarRole::X { n, k: pk, t: pt });
                    let py = var(&sp, VarRole::Y { n, k: pk, t: pt });
                    terms.square(1.0, &[(x, 1.0), (px, -1.0)], 0.0).square(1.0, &[(y, 1.0), (py, -1.0)], 0.0)
                } else {
                    let [x0, y0] = u.initial_xy;
                    terms.square(1.0, &[(x, 1.0)], -x0).square(1.0, &[(y, 1.0)], -y0)
                };
                let disp = disp.constant(-step2).normalized(step2);
                sp.push(Kind::ConvexQuadratic, Origin::Displacement { n, k, t }, disp);

                let p_i = dv.p_cm[n][k][t];
                energy
                    .square(0.5 * p_i / g_i, &[(g, 1.0)], 0.0)
                    .square(0.5 * g_i / p_i, &[(p, 1.0)], 0.0);

                sp.push_box(p, 0.0, u.p_cm_max);
            }
            sp.push_box(p_se, 0.0, u.p_se_max);
            sp.push_box(f, 0.0, u.f_max);
        }
        let e = energy.normalized(config.e_max.max(f64::MIN_POSITIVE));
        sp.push(Kind::ConvexQuadratic, Origin::Energy { n }, e);
    }
    sp.audit()?;
    Ok(sp)
}

/// BS-block sub-problem: BS transmit power and CPU frequency per round with the
/// UAV block frozen at `lp`. Rounds are independent blocks.
pub fn build_subproblem2(config: &ScenarioConfig, lp: &LinearizationPoint) -> Result<ConvexSubproblem> {
    check_point(config, lp)?;
    let (nn, kk) = (config.n_uavs(), config.rounds);
    let dv = &lp.dv;
    let g0 = config.gamma0();
    let dl_numer = config.model_size_down * LN_2 / config.bw_bs;
    let (lat, _) = evaluate(config, dv)?;

    let mut sp = ConvexSubproblem::new(SubproblemKind::Bs);
    for k in 0..kk {
        let b = Some(k);
        let work = config.agg_scale * config.cycles_per_sample_bs[k] * config.agg_samples[k];
        let frozen: Vec<f64> = (0..nn).map(|n| lat.t_sense[n][k] + lat.t_train[n][k] + lat.t_upload[n][k]).collect();
        let tau_lp = (0..nn)
            .map(|n| frozen[n] + work / dv.f_bs[k] + lp.slack.theta[n][k])
            .fold(0.0, f64::max);

        let p = sp.add_var(VarRole::BsPower { k }, config.p_bs_max, dv.p_bs[k], b);
        let f = sp.add_var(VarRole::BsFrequency { k }, config.f_bs_max, dv.f_bs[k], b);
        let thetas: Vec<usize> = (0..nn)
            .map(|n| sp.add_var(VarRole::DownloadSlack { n, k }, lp.slack.theta[n][k], lp.slack.theta[n][k], b))
            .collect();
        let tau = sp.add_var(VarRole::Epigraph { k }, tau_lp, tau_lp, b);
        sp.objective.push((tau, tau_lp));

        let vars = sp.variables.clone();
        let mut terms = Terms::new(&vars);
        for n in 0..nn {
            let epi = terms
                .constant(frozen[n])
                .recip(f, work)
                .lin(thetas[n], 1.0)
                .lin(tau, -1.0)
                .normalized(tau_lp);
            sp.push(Kind::Epigraph, Origin::Epigraph { n, k }, epi);

            let d = crate::model::download_distance(config, dv, n, k);
            let xi_i = g0 * dv.p_bs[k] / (d * d);
            let (a, bc) = log_bound_coefficients(xi_i);
            let dl = terms
                .recip(thetas[n], dl_numer)
                .constant(-a)
                .recip(p, bc * d * d / g0)
                .normalized(xi_i.ln_1p());
            sp.push(Kind::LogConcaveBound, Origin::DownlinkPower { n, k }, dl);
        }
        sp.push_box(p, 0.0, config.p_bs_max);
        sp.push_box(f, 0.0, config.f_bs_max);
    }
    sp.audit()?;
    Ok(sp)
}
