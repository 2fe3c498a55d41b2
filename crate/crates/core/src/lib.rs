//! Sub-Riemannian geometry of the Heisenberg group: metrics, horizontal
//! paths, obstacle-avoiding planning and grid length estimates.

pub mod error;
pub mod estimator;
pub mod group;
pub mod metrics;
pub mod obstacles;
pub mod paths;
pub mod planner;

pub use error::{Error, Result};
pub use group::{HPoint, PlanarPoint};
