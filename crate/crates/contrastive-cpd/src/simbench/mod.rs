//! Simulation scenarios, divergence oracles, and the delay benchmark.
//!
//! This module provides everything needed to exercise the detector on
//! synthetic data with known answers:
//!
//! * [`dist`]: scalar Gaussian and uniform laws with densities and sampling,
//! * [`scenario`]: seeded piecewise-stationary stream generators,
//! * [`quadrature`]: adaptive Simpson integration used by the oracles,
//! * [`divergence`]: Jensen-Shannon divergence, its lower bound for small
//!   mean shifts, and a Monte-Carlo check of the population value of the
//!   contrast statistic,
//! * [`benchmark`]: calibrated detection-delay runs over a scenario grid,
//!   including the standard 3x3 grid and a CSV report writer.

pub mod benchmark;
pub mod dist;
pub mod divergence;
pub mod quadrature;
pub mod scenario;

pub use benchmark::{
    aggregate, run_benchmark, standard_grid, write_csv, BenchmarkConfig, BenchmarkError,
    BenchmarkRow, RepOutcome,
};
pub use dist::Dist;
pub use divergence::{
    js_divergence, js_lower_bound_check, verify_mean_contrast_identity, DivergenceError,
    MeanContrastReport, JS_TOLERANCE,
};
pub use quadrature::{integrate, QuadratureFailure};
pub use scenario::{
    gaussian_to_uniform, generate, mean_shift, mean_shift_with, variance_change, ScenarioSpec,
};
