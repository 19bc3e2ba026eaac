//! Brute-force reference solutions for tiny instances.
//!
//! Variables with a provably optimal value are pinned first; the rest are
//! searched on a uniform grid that includes both endpoints of every box.

mod golden;
mod grid;

pub use golden::{config_hash, GoldenRecord};
pub use grid::{grid_search, monotone_pin, GridResult, GridSpec, Pin, PinnedPoint, TrajectoryGrid, MAX_GRID_POINTS};
