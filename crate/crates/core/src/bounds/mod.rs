//! Pathwise quenching-time bounds and probability bounds.
//!
//! Pathwise quantities are first passages of running exponential functionals
//! of the mixed noise. Probability bounds are deterministic formulas in the
//! model constants; the only Monte Carlo input is the `L₁` constant of the
//! lower bound.

mod functional;
mod l1;
mod pathwise;
mod probability;

pub use functional::{exp_functional, functional_of, ExpFunctional, SATURATION};
pub use l1::{estimate_l1, L1Estimate, TRUNCATION_SHARE};
pub use pathwise::{
    double_star_functional, envelope_functional, lower_functional, script_g, tau_double_star,
    tau_star, tau_upper, upper_functional, BoundContext, BoundReport, RateEnvelopes,
    SpecialCoefficients,
};
pub use probability::{
    derivative_bound, lb_quench_prob, m0_of_t, tail_bound_dependent, tail_bound_independent,
    ub_prob_by_t, ExponentLaw, ProbBound,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{0}")]
    NotApplicable(String),
    #[error("bound needs k21 = k11 and k22 = k12, got rho = {rho:?}")]
    AsymmetricNoise { rho: [[f64; 2]; 2] },
    #[error("rate envelopes need initial data z_i(0) = C_i psi")]
    NotPsiData,
    #[error("alpha = {alpha} must lie in (H, 1) = ({hurst}, 1)")]
    AlphaOutOfRange { alpha: f64, hurst: f64 },
    #[error("L1 estimate {0} is below 1")]
    InvalidL1(f64),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Noise(#[from] crate::noise::NoiseError),
    #[error(transparent)]
    Quadrature(#[from] crate::quad::QuadError),
}
