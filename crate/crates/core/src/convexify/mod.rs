//! Slack-variable reformulation and SCA surrogates that turn the two block
//! sub-problems into convex programs at a given linearization point.

mod bounds;
mod build;
mod problem;
mod slack;

pub use bounds::{
    balanced_taylor_gz_bound, bilinear_upper_bound, distance_slack_residual, downlink_distance_bound,
    downlink_log_bound, energy_surrogate, log_lower_bound, taylor_gz_bound,
};
pub use build::{build_subproblem1, build_subproblem2};
pub use problem::{
    Affine, Constraint, ConstraintBody, ConstraintKind, ConstraintOrigin, ConvexFn, ConvexSubproblem, SubproblemKind,
    VarRole, Variable,
};
pub use slack::{LinearizationPoint, SlackState, ZERO_NUDGE};

#[cfg(test)]
mod tests;
