//! Ensembles of realisations and their comparison with the bounds.
//!
//! Path `i` always uses noise stream `i` of the base seed and results are
//! collected in path order, so the worker count never changes the output.

mod ensemble;
mod stats;
mod theory;
mod verdict;

pub use ensemble::{
    empirical_quench_prob, run_ensemble, run_paths, threads_from_env, EnsembleSummary, PathRecord,
    SENSITIVITY_EPS,
};
pub use stats::{wilson_interval, Proportion, Z95};
pub use theory::{TheoryReport, L1_SEED_OFFSET};
pub use verdict::{check_theorem_consistency, Verdict, ALMOST_SURE_LEVEL, ORDERING_ALLOWANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error(transparent)]
    Fem(#[from] crate::fem::FemError),
    #[error(transparent)]
    Bounds(#[from] crate::bounds::BoundsError),
    #[error(transparent)]
    Noise(#[from] crate::noise::NoiseError),
    #[error("horizon {t} exceeds the simulated horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("ensemble and bound formulas use different dependence modes")]
    DependenceMismatch,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
