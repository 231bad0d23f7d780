//! Linear finite elements in space, semi-implicit Euler in time.
//!
//! Diffusion is implicit; the singular reaction and the multiplicative noise
//! are explicit. Loads are the consistent mass matrix applied to nodal values
//! of the nonlinearity, which equals exact integration of the interpolant
//! against the hat functions.

mod assemble;
mod simulate;
mod trajectory;

pub use assemble::{FemMatrices, Tridiagonal, TridiagonalLu};
pub use simulate::{detect_quench, simulate, Simulator, Stepper};
pub use trajectory::{FieldDump, QuenchComponent, QuenchEvent, Trajectory};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("need at least 3 elements, got {0}")]
    TooFewElements(usize),
    #[error("tridiagonal system singular at row {row}")]
    SingularSystem { row: usize },
    #[error("non-finite load in component {component} at step {step}; quench was not caught")]
    NonFinite { step: usize, component: usize },
    #[error("state too close to the singularity at step {step}: 1 - u = {gap}")]
    TooCloseToQuench { step: usize, gap: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("noise generation failed: {0}")]
    Noise(#[from] crate::noise::NoiseError),
}
