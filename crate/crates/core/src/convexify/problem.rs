use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DecisionVector;

/// Sparse affine form `Σ coef·u[j] + offset`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub offset: f64,
}

impl Affine {
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * u[j]).sum::<f64>() + self.offset
    }
}

/// Convex function in the scaled variables:
/// `constant + Σ lin·u[j] + Σ w·(affine)² + Σ c/u[j]` with `w, c >= 0`.
/// Reciprocal terms restrict the domain to `u[j] > 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexFn {
    pub constant: f64,
    pub linear: Vec<(usize, f64)>,
    pub squares: Vec<(f64, Affine)>,
    pub reciprocals: Vec<(usize, f64)>,
}

impl ConvexFn {
    /// Value at `u`, `+inf` outside the domain.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut v = self.constant;
        for &(j, c) in &self.linear {
            v += c * u[j];
        }
        for (w, a) in &self.squares {
            let r = a.eval(u);
            v += w * r * r;
        }
        for &(j, c) in &self.reciprocals {
            if !(u[j] > 0.0) {
                return f64::INFINITY;
            }
            v += c / u[j];
        }
        v
    }

    /// Sparse gradient at `u` as `(index, partial)` pairs; indices may repeat.
    pub fn gradient(&self, u: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.extend(self.linear.iter().copied());
        for (w, a) in &self.squares {
            let r = 2.0 * w * a.eval(u);
            out.extend(a.terms.iter().map(|&(j, c)| (j, r * c)));
        }
        for &(j, c) in &self.reciprocals {
            out.push((j, -c / (u[j] * u[j])));
        }
    }

    /// Adds `scale·∇²f(u)` through `add(i, j, value)` for every stored entry
    /// (both triangles).
    pub fn hessian(&self, u: &[f64], scale: f64, mut add: impl FnMut(usize, usize, f64)) {
        for (w, a) in &self.squares {
            let s = 2.0 * w * scale;
            for &(i, ci) in &a.terms {
                for &(j, cj) in &a.terms {
                    add(i, j, s * ci * cj);
                }
            }
        }
        for &(j, c) in &self.reciprocals {
            add(j, j, scale * 2.0 * c / (u[j] * u[j] * u[j]));
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.linear
            .iter()
            .map(|t| t.0)
            .chain(self.squares.iter().flat_map(|(_, a)| a.terms.iter().map(|t| t.0)))
            .chain(self.reciprocals.iter().map(|t| t.0))
    }

    pub fn scaled(mut self, factor: f64) -> ConvexFn {
        self.constant *= factor;
        self.linear.iter_mut().for_each(|t| t.1 *= factor);
        self.squares.iter_mut().for_each(|t| t.0 *= factor);
        self.reciprocals.iter_mut().for_each(|t| t.1 *= factor);
        self
    }
}

/// Shape of a constraint, used by the convexity audit and for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    Affine,
    ConvexQuadratic,
    /// Restriction built from the log lower bound (linear in `1/x`).
    LogConcaveBound,
    /// `τ_k >=` one UAV's latency surrogate.
    Epigraph,
    Box,
}

/// Where a constraint comes from in the convexified problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintOrigin {
    Epigraph { n: usize, k: usize },
    /// Linearized `g·z >= s_l/T`.
    RateProduct { n: usize, k: usize, t: usize },
    /// `z <= B·log2(1+γ)` through the log lower bound.
    RateLog { n: usize, k: usize, t: usize },
    /// `γ₀·p >= α·γ` through the bilinear upper bound.
    SnrProduct { n: usize, k: usize, t: usize },
    /// `x² + y² + H² <= α`.
    DistanceSlack { n: usize, k: usize, t: usize },
    /// Download time bound, trajectory side (BS power frozen).
    DownlinkDistance { n: usize, k: usize },
    /// Download time bound, BS side (trajectory frozen).
    DownlinkPower { n: usize, k: usize },
    Energy { n: usize },
    Displacement { n: usize, k: usize, t: usize },
    VariableBox { var: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintBody {
    /// `lo <= u[var] <= hi` in scaled units; either side may be infinite.
    Box { var: usize, lo: f64, hi: f64 },
    /// `f(u) <= 0`.
    Function(ConvexFn),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub origin: ConstraintOrigin,
    pub body: ConstraintBody,
}

/// Role of a scaled variable in the decision or slack space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarRole {
    X { n: usize, k: usize, t: usize },
    Y { n: usize, k: usize, t: usize },
    CommPower { n: usize, k: usize, t: usize },
    SensePower { n: usize, k: usize },
    UavFrequency { n: usize, k: usize },
    UploadSlack { n: usize, k: usize, t: usize },
    RateSlack { n: usize, k: usize, t: usize },
    SnrSlack { n: usize, k: usize, t: usize },
    DistanceSlack { n: usize, k: usize, t: usize },
    DownloadSlack { n: usize, k: usize },
    BsPower { k: usize },
    BsFrequency { k: usize },
    Epigraph { k: usize },
}

/// A scaled variable: physical value = `scale · u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub role: VarRole,
    pub scale: f64,
    /// Scaled value at the linearization point.
    pub start: f64,
    /// Independent block this variable belongs to; `None` couples blocks.
    pub block: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubproblemKind {
    /// Trajectory, UAV powers and CPU frequencies; BS block frozen.
    Uav,
    /// BS power and CPU frequency; UAV block frozen.
    Bs,
}

/// One convexified block sub-problem at a fixed linearization point.
///
/// Variables are scaled so that they are O(1) at the linearization point and
/// every non-box constraint is normalized by a representative magnitude.
/// The objective `Σ_k τ_k` is linear, in seconds.
#[derive(Debug, Clone)]
pub struct ConvexSubproblem {
    pub kind: SubproblemKind,
    pub variables: Vec<Variable>,
    /// Linear objective over scaled variables, in seconds.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    index: HashMap<VarRole, usize>,
}

impl ConvexSubproblem {
    pub(crate) fn new(kind: SubproblemKind) -> Self {
        ConvexSubproblem { kind, variables: Vec::new(), objective: Vec::new(), constraints: Vec::new(), index: HashMap::new() }
    }

    pub(crate) fn add_var(&mut self, role: VarRole, scale: f64, physical_start: f64, block: Option<usize>) -> usize {
        let j = self.variables.len();
        self.variables.push(Variable { role, scale, start: physical_start / scale, block });
        self.index.insert(role, j);
        j
    }

    pub(crate) fn push(&mut self, kind: ConstraintKind, origin: ConstraintOrigin, f: ConvexFn) {
        self.constraints.push(Constraint { kind, origin, body: ConstraintBody::Function(f) });
    }

    pub(crate) fn push_box(&mut self, var: usize, lo_phys: f64, hi_phys: f64) {
        let s = self.variables[var].scale;
        self.constraints.push(Constraint {
            kind: ConstraintKind::Box,
            origin: ConstraintOrigin::VariableBox { var },
            body: ConstraintBody::Box { var, lo: lo_phys / s, hi: hi_phys / s },
        });
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var(&self, role: VarRole) -> Option<usize> {
        self.index.get(&role).copied()
    }

    /// Scaled starting point (the linearization point with tight slacks).
    pub fn start(&self) -> Vec<f64> {
        self.variables.iter().map(|v| v.start).collect()
    }

    pub fn to_physical(&self, u: &[f64]) -> Vec<f64> {
        self.variables.iter().zip(u).map(|(v, x)| v.scale * x).collect()
    }

    pub fn objective_value(&self, u: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * u[j]).sum()
    }

    /// Surrogate objective at `u` with every epigraph variable lowered to the
    /// largest surrogate latency it bounds: `Σ_k max_n surrogate_{n,k}(u)`.
    pub fn surrogate_objective(&self, u: &[f64]) -> f64 {
        let mut tau: HashMap<usize, f64> = HashMap::new();
        for c in &self.constraints {
            let (ConstraintOrigin::Epigraph { k, .. }, ConstraintBody::Function(f)) = (&c.origin, &c.body) else {
                continue;
            };
            let Some(j) = self.var(VarRole::Epigraph { k: *k }) else { continue };
            let coef: f64 = f.linear.iter().filter(|t| t.0 == j).map(|t| t.1).sum();
            // f = rest(u) + coef·u_j with coef < 0
            let rest = f.eval(u) - coef * u[j];
            let needed = rest / -coef;
            let e = tau.entry(j).or_insert(f64::NEG_INFINITY);
            *e = e.max(needed);
        }
        self.objective.iter().map(|&(j, c)| c * tau.get(&j).copied().unwrap_or(u[j])).sum()
    }

    /// Verifies every constraint is of a convex family with valid indices.
    pub fn audit(&self) -> Result<()> {
        let n = self.n_vars();
        for &(j, c) in &self.objective {
            if j >= n || !c.is_finite() {
                return Err(Error::NotConvex(format!("bad objective term ({j}, {c})")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            match &c.body {
                ConstraintBody::Box { var, lo, hi } => {
                    if *var >= n || !(lo <= hi) || lo.is_nan() || hi.is_nan() {
                        return Err(Error::NotConvex(format!("constraint {i}: malformed box")));
                    }
                }
                ConstraintBody::Function(f) => {
                    if f.variables().any(|j| j >= n) {
                        return Err(Error::NotConvex(format!("constraint {i}: variable index out of range")));
                    }
                    if f.squares.iter().any(|(w, _)| !(*w >= 0.0)) {
                        return Err(Error::NotConvex(format!("constraint {i} ({:?}): negative square weight", c.origin)));
                    }
                    if f.reciprocals.iter().any(|(_, c)| !(*c >= 0.0)) {
                        return Err(Error::NotConvex(format!("constraint {i} ({:?}): negative reciprocal", c.origin)));
                    }
                    let finite = f.constant.is_finite()
                        && f.linear.iter().all(|t| t.1.is_finite())
                        && f.squares.iter().all(|(w, a)| w.is_finite() && a.offset.is_finite() && a.terms.iter().all(|t| t.1.is_finite()))
                        && f.reciprocals.iter().all(|t| t.1.is_finite());
                    if !finite {
                        return Err(Error::NotConvex(format!("constraint {i} ({:?}): non-finite coefficient", c.origin)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes the decision variables owned by this sub-problem into `dv`.
    pub fn write_decisions(&self, physical: &[f64], dv: &mut DecisionVector) {
        for (v, &x) in self.variables.iter().zip(physical) {
            match v.role {
                VarRole::X { n, k, t } => dv.x[n][k][t] = x,
                VarRole::Y { n, k, t } => dv.y[n][k][t] = x,
                VarRole::CommPower { n, k, t } => dv.p_cm[n][k][t] = x,
                VarRole::SensePower { n, k } => dv.p_se[n][k] = x,
                VarRole::UavFrequency { n, k } => dv.f_uav[n][k] = x,
                VarRole::BsPower { k } => dv.p_bs[k] = x,
                VarRole::BsFrequency { k } => dv.f_bs[k] = x,
                _ => {}
            }
        }
    }

    /// Number of constraints of each kind.
    pub fn count_by_kind(&self) -> HashMap<ConstraintKind, usize> {
        let mut m = HashMap::new();
        for c in &self.constraints {
            *m.entry(c.kind).or_insert(0) += 1;
        }
        m
    }
}
