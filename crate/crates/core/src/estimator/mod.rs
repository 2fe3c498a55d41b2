//! Numerical estimates: lattice shortest paths for the `π_t`-distance in box
//! complements, box-counting dimension, and the dimension comparison envelope.

mod dimension;
mod grid;

pub use dimension::{box_dimension, dct_bounds, DimEstimate, DimInput, Gauge};
pub use grid::{grid_pi_distance, interior_crossing_cost, GridSpec, GridSteps, PathEstimate};

/// Worker count: `HEISGEO_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn thread_count() -> usize {
    std::env::var("HEISGEO_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
