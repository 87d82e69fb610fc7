//! Phase-unwrapping toolkit: wrap algebra, classical unwrappers, synthetic
//! phase generators, evaluation metrics and grid serialization.

pub mod baselines;
pub mod datagen;
pub mod dct;
pub mod error;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod phase;

pub use error::{Error, Result};
pub use grid::Grid2D;
pub use phase::{
    adaptive_weights, congruence, forward_gradient, itoh_violations, weighted_energy, wrap,
    wrap_grid, wrap_scalar, wrapped_gradient, GradientField, WeightBounds,
};
