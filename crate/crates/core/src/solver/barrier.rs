//! Log-barrier interior-point method for [`ConvexSubproblem`]s, with a Phase I
//! that finds a strictly feasible start.

use std::borrow::Cow;

use log::{debug, trace};

use crate::convexify::{ConstraintBody, ConvexFn, ConvexSubproblem};
use crate::error::{Error, Result};

use super::linalg::{ArrowMatrix, Layout};
use super::{SolveResult, SolveSettings, SolveStatus};

const NEWTON_TOL: f64 = 1e-10;
const ARMIJO: f64 = 0.25;
const PHASE1_EARLY_EXIT: f64 = -0.05;
/// A start closer than this to a boundary is recentered by Phase I.
const MIN_START_MARGIN: f64 = 1e-6;
const STATIONARITY_FRACTION: f64 = 1e-3;

/// `min cost·x  s.t.  f_i(x) − x[s] < 0,  lo < x < hi`, where the `x[s]` shift
/// is only present in Phase I.
struct BarrierProblem<'a> {
    n: usize,
    funcs: Vec<Cow<'a, ConvexFn>>,
    shift: Option<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    layout: Layout,
}

struct Workspace {
    d: Vec<f64>,
    d_new: Vec<f64>,
    grad: Vec<f64>,
    gbuf: Vec<(usize, f64)>,
    hess: ArrowMatrix,
}

enum Centering {
    Centered { steps: usize, lambda: f64 },
    StepLimit { steps: usize, lambda: f64 },
    Stopped { steps: usize },
}

impl<'a> BarrierProblem<'a> {
    fn new(
        n: usize,
        funcs: Vec<Cow<'a, ConvexFn>>,
        shift: Option<usize>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        cost: Vec<f64>,
        block_of: &[Option<usize>],
    ) -> Self {
        let layout = Layout::new(block_of, funcs.iter().map(|f| f.variables().collect()));
        BarrierProblem { n, funcs, shift, lo, hi, cost, layout }
    }

    fn n_barrier_terms(&self) -> usize {
        self.funcs.len()
            + self.lo.iter().filter(|v| v.is_finite()).count()
            + self.hi.iter().filter(|v| v.is_finite()).count()
    }

    fn workspace(&self) -> Workspace {
        Workspace {
            d: Vec::new(),
            d_new: Vec::new(),
            grad: vec![0.0; self.n],
            gbuf: Vec::new(),
            hess: ArrowMatrix::zeros(&self.layout),
        }
    }

    /// Distances to every barrier boundary; `false` if any is not positive.
    fn margins(&self, x: &[f64], out: &mut Vec<f64>) -> bool {
        out.clear();
        let s = self.shift.map_or(0.0, |j| x[j]);
        for f in &self.funcs {
            out.push(s - f.eval(x));
        }
        for (j, (&lo, &hi)) in self.lo.iter().zip(&self.hi).enumerate() {
            if lo.is_finite() {
                out.push(x[j] - lo);
            }
            if hi.is_finite() {
                out.push(hi - x[j]);
            }
        }
        out.iter().all(|d| *d > 0.0 && d.is_finite())
    }

    /// Gradient and Hessian of `t·cost·x − Σ ln d_i` at `x`, given margins `ws.d`.
    fn assemble(&self, x: &[f64], t: f64, ws: &mut Workspace) {
        let Workspace { d, grad, gbuf, hess, .. } = ws;
        hess.reset();
        for (g, c) in grad.iter_mut().zip(&self.cost) {
            *g = t * c;
        }
        for (f, &di) in self.funcs.iter().zip(d.iter()) {
            f.gradient(x, gbuf);
            if let Some(s) = self.shift {
                gbuf.push((s, -1.0));
            }
            merge_duplicates(gbuf);
            let inv = 1.0 / di;
            let inv2 = inv * inv;
            for &(a, va) in gbuf.iter() {
                grad[a] += va * inv;
                for &(b, vb) in gbuf.iter() {
                    hess.add(&self.layout, a, b, va * vb * inv2);
                }
            }
            f.hessian(x, inv, |a, b, v| hess.add(&self.layout, a, b, v));
        }
        let mut k = self.funcs.len();
        for j in 0..self.n {
            if self.lo[j].is_finite() {
                let inv = 1.0 / d[k];
                grad[j] -= inv;
                hess.add(&self.layout, j, j, inv * inv);
                k += 1;
            }
            if self.hi[j].is_finite() {
                let inv = 1.0 / d[k];
                grad[j] += inv;
                hess.add(&self.layout, j, j, inv * inv);
                k += 1;
            }
        }
    }

    /// Newton direction for the assembled system, regularized if needed.
    fn direction(&self, ws: &Workspace) -> Option<Vec<f64>> {
        let rhs: Vec<f64> = ws.grad.iter().map(|g| -g).collect();
        let mut shift = 0.0;
        for _ in 0..8 {
            if let Some(dx) = ws.hess.solve(&self.layout, &rhs, shift) {
                return Some(dx);
            }
            log::trace!("regularizing Newton system");
            shift = if shift == 0.0 { 1e-12 } else { shift * 100.0 };
        }
        None
    }

    /// Runs damped Newton on the barrier function at fixed `t`.
    fn center(
        &self,
        x: &mut [f64],
        t: f64,
        max_steps: usize,
        stationarity_tol: f64,
        ws: &mut Workspace,
        stop: &dyn Fn(&[f64]) -> bool,
    ) -> Result<Centering> {
        let mut x_new = vec![0.0; self.n];
        let mut lambda = f64::INFINITY;
        for steps in 0..max_steps {
            if !self.margins(x, &mut ws.d) {
                return Err(Error::Solver("iterate left the barrier domain".into()));
            }
            self.assemble(x, t, ws);
            let Some(dx) = self.direction(ws) else {
                return Err(Error::Solver("Newton system is singular".into()));
            };
            let slope: f64 = ws.grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            lambda = (-slope).max(0.0).sqrt();
            // At large t rounding puts a floor under λ; the stationarity measure
            // λ/t is what matters there.
            if lambda * lambda / 2.0 <= NEWTON_TOL || lambda / t <= stationarity_tol {
                return Ok(Centering::Centered { steps, lambda });
            }
            let mut step = 1.0;
            loop {
                for ((xn, xi), di) in x_new.iter_mut().zip(x.iter()).zip(&dx) {
                    *xn = xi + step * di;
                }
                if self.margins(&x_new, &mut ws.d_new) {
                    let lin: f64 = self.cost.iter().zip(&dx).map(|(c, d)| c * d).sum::<f64>() * step * t;
                    let logs: f64 = ws.d_new.iter().zip(&ws.d).map(|(a, b)| (a / b).ln()).sum();
                    if lin - logs <= ARMIJO * step * slope {
                        break;
                    }
                }
                step *= 0.5;
                if step < 1e-14 {
                    // No further decrease is representable; treat as centered
                    // when the decrement is already small.
                    trace!("line search stalled at t={t:.3e}, lambda={lambda:.3e}");
                    return Ok(if lambda < 1e-3 {
                        Centering::Centered { steps, lambda }
                    } else {
                        Centering::StepLimit { steps, lambda }
                    });
                }
            }
            x.copy_from_slice(&x_new);
            if stop(x) {
                return Ok(Centering::Stopped { steps: steps + 1 });
            }
        }
        Ok(Centering::StepLimit { steps: max_steps, lambda })
    }
}

fn merge_duplicates(v: &mut Vec<(usize, f64)>) {
    v.sort_unstable_by_key(|t| t.0);
    v.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
}

fn split_constraints(sp: &ConvexSubproblem) -> (Vec<&ConvexFn>, Vec<f64>, Vec<f64>) {
    let n = sp.n_vars();
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    let mut funcs = Vec::new();
    for c in &sp.constraints {
        match &c.body {
            ConstraintBody::Box { var, lo: l, hi: h } => {
                lo[*var] = lo[*var].max(*l);
                hi[*var] = hi[*var].min(*h);
            }
            ConstraintBody::Function(f) => funcs.push(f),
        }
    }
    (funcs, lo, hi)
}

/// Finds a point strictly inside every constraint, starting from `x0`.
fn phase1(
    sp: &ConvexSubproblem,
    funcs: &[&ConvexFn],
    lo: &[f64],
    hi: &[f64],
    x0: &[f64],
    settings: &SolveSettings,
    steps: &mut usize,
) -> Result<Option<Vec<f64>>> {
    let n = sp.n_vars();
    let s = n;
    let mut all: Vec<Cow<ConvexFn>> = funcs.iter().map(|f| Cow::Borrowed(*f)).collect();
    for j in 0..n {
        if lo[j].is_finite() {
            all.push(Cow::Owned(ConvexFn { constant: lo[j], linear: vec![(j, -1.0)], ..Default::default() }));
        }
        if hi[j].is_finite() {
            all.push(Cow::Owned(ConvexFn { constant: -hi[j], linear: vec![(j, 1.0)], ..Default::default() }));
        }
    }
    let worst = all.iter().map(|f| f.eval(x0)).fold(f64::NEG_INFINITY, f64::max);
    if !worst.is_finite() {
        return Err(Error::Solver("starting point outside the constraint domain".into()));
    }
    if worst < -MIN_START_MARGIN {
        return Ok(Some(x0.to_vec()));
    }

    let r = settings.phase1_radius;
    let mut p_lo: Vec<f64> = x0.iter().map(|v| v - r * v.abs().max(1.0)).collect();
    let mut p_hi: Vec<f64> = x0.iter().map(|v| v + r * v.abs().max(1.0)).collect();
    // Reciprocal terms need a positive argument: keep such variables positive.
    for f in funcs {
        for &(j, _) in &f.reciprocals {
            p_lo[j] = p_lo[j].max(0.0);
        }
    }
    p_lo.push(-1.0);
    p_hi.push(f64::INFINITY);
    let mut block_of: Vec<Option<usize>> = sp.variables.iter().map(|v| v.block).collect();
    block_of.push(None);
    let mut cost = vec![0.0; n + 1];
    cost[s] = 1.0;
    let prob = BarrierProblem::new(n + 1, all, Some(s), p_lo, p_hi, cost, &block_of);

    let mut x = x0.to_vec();
    x.push(worst + 0.1 * worst.abs().max(1.0));
    let m = prob.n_barrier_terms() as f64;
    let mut ws = prob.workspace();
    let mut t = 1.0;
    let stop = |x: &[f64]| x[s] < PHASE1_EARLY_EXIT;
    loop {
        let outcome = prob.center(&mut x, t, settings.max_inner_iters, STATIONARITY_FRACTION * settings.kkt_tol, &mut ws, &stop)?;
        match outcome {
            Centering::Centered { steps: k, .. } | Centering::Stopped { steps: k } | Centering::StepLimit { steps: k, .. } => {
                *steps += k
            }
        }
        if x[s] < 0.0 {
            debug!("phase I done: margin {:.3e} after {} Newton steps", -x[s], steps);
            x.pop();
            return Ok(Some(x));
        }
        if matches!(outcome, Centering::StepLimit { .. }) || m / t < settings.kkt_tol {
            return Ok(None);
        }
        t *= settings.barrier_mu;
    }
}

/// Solves a convexified sub-problem from its linearization point.
pub fn solve_convex(sp: &ConvexSubproblem, settings: &SolveSettings) -> Result<SolveResult> {
    sp.audit()?;
    let n = sp.n_vars();
    let (funcs, lo, hi) = split_constraints(sp);
    if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
        return Err(Error::Solver("empty variable box".into()));
    }
    let x0 = sp.start();
    let mut steps = 0;
    let Some(mut x) = phase1(sp, &funcs, &lo, &hi, &x0, settings, &mut steps)? else {
        return Ok(SolveResult {
            status: SolveStatus::Infeasible,
            values: sp.to_physical(&x0),
            scaled: x0.clone(),
            objective: sp.objective_value(&x0),
            kkt_residual: f64::INFINITY,
            newton_steps: steps,
        });
    };

    let obj_scale = sp.objective_value(&x).abs().max(1e-12);
    let mut cost = vec![0.0; n];
    for &(j, c) in &sp.objective {
        cost[j] += c / obj_scale;
    }
    let block_of: Vec<Option<usize>> = sp.variables.iter().map(|v| v.block).collect();
    let prob = BarrierProblem::new(n, funcs.into_iter().map(Cow::Borrowed).collect(), None, lo, hi, cost, &block_of);
    let m = prob.n_barrier_terms() as f64;
    let mut ws = prob.workspace();
    let mut t = m / settings.barrier_initial_gap;
    let mut status = SolveStatus::Optimal;
    let lambda = loop {
        match prob.center(&mut x, t, settings.max_inner_iters, STATIONARITY_FRACTION * settings.kkt_tol, &mut ws, &|_| false)? {
            Centering::Centered { steps: k, lambda } => {
                steps += k;
                if m / t <= settings.kkt_tol {
                    break lambda;
                }
            }
            Centering::StepLimit { steps: k, lambda } => {
                steps += k;
                status = SolveStatus::MaxIters;
                break lambda;
            }
            Centering::Stopped { .. } => unreachable!("phase II never stops early"),
        }
        t *= settings.barrier_mu;
    };
    let kkt_residual = (lambda / t).max(m / t);
    trace!("barrier finished: t={t:.3e}, kkt={kkt_residual:.3e}, {steps} Newton steps");
    Ok(SolveResult {
        status,
        values: sp.to_physical(&x),
        objective: sp.objective_value(&x),
        scaled: x,
        kkt_residual,
        newton_steps: steps,
    })
}
