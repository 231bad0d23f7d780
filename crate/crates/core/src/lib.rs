//! Numerical laboratory for a pair of coupled MEMS-type reaction-diffusion
//! equations with singular absorption and mixed Brownian / fractional
//! Brownian multiplicative noise.
//!
//! - [`noise`]: Brownian motion, fractional Brownian motion and their mixtures.
//! - [`spectral`]: the principal Robin eigenpair and heat-semigroup bounds.
//! - [`fem`]: the finite-element semi-implicit Euler scheme and quench detection.
//! - [`bounds`]: pathwise quenching-time bounds and probability bounds.
//! - [`montecarlo`]: ensembles, Wilson intervals and bound verdicts.

// Negated float comparisons throughout are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod fem;
pub mod io;
pub mod montecarlo;
pub mod noise;
pub mod quad;
pub mod spectral;
