//! Brownian and fractional Brownian drivers on a uniform time grid.
//!
//! Every path is generated from a counter-based stream: a base seed plus a
//! path index select a ChaCha20 stream, so path `i` of an ensemble is the same
//! no matter which worker produces it or in what order.

mod brownian;
mod cholesky;
mod circulant;
mod mixed;
mod volterra;

pub use brownian::{brownian_increments, brownian_path};
pub use cholesky::{fbm_covariance, FbmCholesky, CHOLESKY_MAX_STEPS};
pub use circulant::{fbm_path_circulant, CirculantSample, FbmCirculant};
pub use mixed::{mixed_noise, write_noise_csv, MixedNoise};
pub use volterra::{
    fbm_from_brownian, volterra_constant, volterra_kernel, VolterraFbm, VolterraKernel,
};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("time grid needs a positive step count and a positive finite step, got n = {n_steps}, dt = {dt}")]
    InvalidGrid { n_steps: usize, dt: f64 },
    #[error("Hurst index {0} outside (0.5, 1)")]
    InvalidHurst(f64),
    #[error("covariance matrix not positive definite at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },
    #[error("Cholesky sampler limited to {max} steps, grid has {n}")]
    GridTooLarge { n: usize, max: usize },
    #[error("circulant embedding has eigenvalue {min} (largest {max}); too negative to clip")]
    NegativeEigenvalues { min: f64, max: f64 },
    #[error("expected {expected} Brownian increments, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("kernel normalisation failed: {0}")]
    Quadrature(#[from] crate::quad::QuadError),
}

/// Uniform grid `t_k = k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(n_steps: usize, dt: f64) -> Result<Self, NoiseError> {
        if n_steps == 0 || !(dt.is_finite() && dt > 0.0) {
            return Err(NoiseError::InvalidGrid { n_steps, dt });
        }
        Ok(Self { n_steps, dt })
    }

    /// Grid with `n_steps` steps covering `[0, horizon]`.
    pub fn over(horizon: f64, n_steps: usize) -> Result<Self, NoiseError> {
        if n_steps == 0 || !(horizon.is_finite() && horizon > 0.0) {
            return Err(NoiseError::InvalidGrid {
                n_steps,
                dt: horizon,
            });
        }
        Self::new(n_steps, horizon / n_steps as f64)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.t(k)).collect()
    }
}

pub(crate) fn check_hurst(h: f64) -> Result<(), NoiseError> {
    if h.is_finite() && h > 0.5 && h < 1.0 {
        Ok(())
    } else {
        Err(NoiseError::InvalidHurst(h))
    }
}

/// Identifies one path: the ensemble seed and the path's index within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathSeed {
    pub seed: u64,
    pub index: u64,
}

impl PathSeed {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Stream feeding the Brownian increments.
    pub fn brownian_rng(&self) -> ChaCha20Rng {
        stream_rng(self.seed, 2 * self.index)
    }

    /// Stream feeding the independent fBm sampler.
    pub fn fbm_rng(&self) -> ChaCha20Rng {
        stream_rng(self.seed, 2 * self.index + 1)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn standard_normals<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// How the fractional driver relates to the Brownian one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dependence {
    /// `B^H` sampled from its own stream, independent of `W`.
    Independent,
    /// `B^H` built from the increments of `W` through the Volterra kernel.
    Volterra,
}

/// Exact sampler used for the independent fractional driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FbmMethod {
    Cholesky,
    Circulant,
}

/// A sampled pair `(W, B^H)` on the grid, both starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub grid: TimeGrid,
    pub hurst: f64,
    pub w: Vec<f64>,
    pub bh: Vec<f64>,
    /// True when the circulant sampler had to fall back to Cholesky.
    pub fallback: bool,
}

enum FbmEngine {
    Cholesky(FbmCholesky),
    Circulant(FbmCirculant),
    Volterra(VolterraFbm),
}

/// Precomputes everything that is shared between paths (Cholesky factor,
/// circulant spectrum or Volterra weights) and hands out paths by index.
pub struct NoiseSampler {
    grid: TimeGrid,
    hurst: f64,
    engine: FbmEngine,
    fallback: bool,
}

impl NoiseSampler {
    pub fn new(
        grid: TimeGrid,
        hurst: f64,
        dependence: Dependence,
        method: FbmMethod,
    ) -> Result<Self, NoiseError> {
        check_hurst(hurst)?;
        let (engine, fallback) = match (dependence, method) {
            (Dependence::Volterra, _) => {
                (FbmEngine::Volterra(VolterraFbm::new(hurst, grid)?), false)
            }
            (Dependence::Independent, FbmMethod::Cholesky) => {
                (FbmEngine::Cholesky(FbmCholesky::new(hurst, grid)?), false)
            }
            (Dependence::Independent, FbmMethod::Circulant) => match FbmCirculant::new(hurst, grid)
            {
                Ok(c) => (FbmEngine::Circulant(c), false),
                Err(NoiseError::NegativeEigenvalues { .. }) => {
                    (FbmEngine::Cholesky(FbmCholesky::new(hurst, grid)?), true)
                }
                Err(e) => return Err(e),
            },
        };
        Ok(Self {
            grid,
            hurst,
            engine,
            fallback,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn sample(&self, seed: PathSeed) -> NoisePath {
        let dw = brownian::increments_from(&mut seed.brownian_rng(), self.grid);
        let bh = match &self.engine {
            FbmEngine::Cholesky(c) => c.sample(&mut seed.fbm_rng()),
            FbmEngine::Circulant(c) => c.sample(&mut seed.fbm_rng()),
            FbmEngine::Volterra(v) => v.apply(&dw),
        };
        NoisePath {
            grid: self.grid,
            hurst: self.hurst,
            w: brownian::cumulative(&dw),
            bh,
            fallback: self.fallback,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(TimeGrid::new(0, 0.1).is_err());
        assert!(TimeGrid::new(10, 0.0).is_err());
        assert!(TimeGrid::new(10, f64::NAN).is_err());
        let g = TimeGrid::over(2.0, 8).unwrap();
        assert_eq!(g.times().len(), 9);
        assert!((g.horizon() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hurst_bounds_are_open() {
        assert!(check_hurst(0.5).is_err());
        assert!(check_hurst(1.0).is_err());
        assert!(check_hurst(0.75).is_ok());
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let s = PathSeed::new(7, 3);
        let a: u64 = s.brownian_rng().random();
        let b: u64 = s.fbm_rng().random();
        let c: u64 = PathSeed::new(7, 4).brownian_rng().random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, s.brownian_rng().random::<u64>());
    }

    #[test]
    fn sampler_paths_start_at_zero() {
        let grid = TimeGrid::over(1.0, 64).unwrap();
        for dep in [Dependence::Independent, Dependence::Volterra] {
            let s = NoiseSampler::new(grid, 0.7, dep, FbmMethod::Circulant).unwrap();
            let p = s.sample(PathSeed::new(1, 0));
            assert_eq!(p.w.len(), 65);
            assert_eq!(p.bh.len(), 65);
            assert_eq!(p.w[0], 0.0);
            assert_eq!(p.bh[0], 0.0);
        }
    }
}
