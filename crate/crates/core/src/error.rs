use thiserror::Error;

/// Errors raised by the latency model, the convexification layer and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),

    #[error("decision vector does not match scenario dimensions: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A transmission with nonzero payload was scheduled at zero rate.
    #[error("zero rate with nonzero payload: {0}")]
    InfeasibleRate(String),

    #[error("scenario admits no feasible point: {0}")]
    InfeasibleScenario(String),

    #[error("linearization point is not strictly feasible: {0}")]
    BadLinearizationPoint(String),

    #[error("convexity audit failed: {0}")]
    NotConvex(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("grid search: {0}")]
    Grid(String),

    /// Instance or grid beyond what the brute-force oracle accepts.
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
