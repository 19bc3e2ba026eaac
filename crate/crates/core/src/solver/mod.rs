//! Convex sub-problem solver and the outer block coordinate descent loop.

mod barrier;
mod bcd;
mod init;
mod linalg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use barrier::solve_convex;
pub use bcd::{run_algorithm1, run_from, run_scheme, BcdStatus, OptimizationTrace, Scheme, TraceRow};
pub use init::{init_feasible, straight_line_start};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    /// Target on the barrier duality gap and Newton stationarity, relative to
    /// the objective at the linearization point.
    pub kkt_tol: f64,
    /// Newton steps allowed per centering.
    pub max_inner_iters: usize,
    /// Relative change in true latency that ends the BCD loop.
    pub bcd_tol: f64,
    pub max_bcd_iters: usize,
    /// Barrier parameter growth factor.
    pub barrier_mu: f64,
    /// Relative duality gap of the first barrier centering.
    pub barrier_initial_gap: f64,
    /// Half-width, relative to each start value, of the box that keeps Phase I bounded.
    pub phase1_radius: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            kkt_tol: 1e-8,
            max_inner_iters: 200,
            bcd_tol: 1e-4,
            max_bcd_iters: 50,
            barrier_mu: 20.0,
            barrier_initial_gap: 1.0,
            phase1_radius: 1e3,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kkt_tol", self.kkt_tol),
            ("bcd_tol", self.bcd_tol),
            ("barrier_initial_gap", self.barrier_initial_gap),
            ("phase1_radius", self.phase1_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.barrier_mu > 1.0) {
            return Err(Error::InvalidConfig(format!("barrier_mu must exceed 1, got {}", self.barrier_mu)));
        }
        if self.max_inner_iters == 0 || self.max_bcd_iters == 0 {
            return Err(Error::InvalidConfig("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Physical variable values.
    pub values: Vec<f64>,
    /// Scaled variable values, as seen by the sub-problem.
    pub scaled: Vec<f64>,
    /// Objective in seconds.
    pub objective: f64,
    pub kkt_residual: f64,
    pub newton_steps: usize,
}

#[cfg(test)]
mod tests;
