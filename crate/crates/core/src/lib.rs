//! Latency minimization for UAV-enabled federated learning with integrated
//! sensing and communication.
//!
//! The [`model`] module evaluates latency and energy of a schedule,
//! [`convexify`] builds the convex restrictions solved in each block of the
//! alternating scheme, [`solver`] runs the iterations and [`oracle`] provides a
//! brute-force reference for very small instances.

pub mod convexify;
pub mod error;
pub mod model;
pub mod oracle;
pub mod scenarios;
pub mod solver;

pub use error::{Error, Result};
