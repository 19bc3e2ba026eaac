//! System model: scenario constants, decision variables, and the closed-form
//! latency/energy evaluators with feasibility checking.

mod config;
mod decision;
mod evaluate;
pub mod latency;

pub use config::{ScenarioConfig, UavConfig};
pub use decision::DecisionVector;
pub use evaluate::{
    check_feasibility, constraint_excesses, download_distance, evaluate, evaluate_energy, max_violation,
    total_latency, uplink_rates, ConstraintRef, EnergyBreakdown, LatencyBreakdown, Violation, FEAS_TOL,
};
pub use latency::{
    aggregation_time, distance_to_bs, download_time, downlink_rate, sensing_energy, sensing_time, training_energy,
    training_time, upload_energy, upload_time, uplink_rate,
};
