use super::{check_hurst, standard_normals, FbmCholesky, NoiseError, PathSeed, TimeGrid};
use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

// Negative eigenvalues smaller than this fraction of the largest are treated
// as round-off and set to zero.
const CLIP_RELATIVE: f64 = 1e-10;

/// Davies–Harte sampler: fractional Gaussian noise from a circulant embedding
/// of its autocovariance, summed into fBm.
#[derive(Clone)]
pub struct FbmCirculant {
    n: usize,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FbmCirculant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmCirculant").field("n", &self.n).finish()
    }
}

fn fgn_autocovariance(h: f64, k: usize, dt: f64) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e)) * dt.powf(e)
}

impl FbmCirculant {
    pub fn new(hurst: f64, grid: TimeGrid) -> Result<Self, NoiseError> {
        check_hurst(hurst)?;
        let n = grid.n_steps();
        let m = 2 * n;
        let mut row: Vec<Complex64> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex64::new(fgn_autocovariance(hurst, lag, grid.dt()), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
        let max = eig.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.iter().cloned().fold(f64::MAX, f64::min);
        if min < 0.0 && -min >= CLIP_RELATIVE * max {
            return Err(NoiseError::NegativeEigenvalues { min, max });
        }
        let sqrt_eig = eig.iter().map(|&l| l.max(0.0).sqrt()).collect();
        Ok(Self { n, sqrt_eig, fft })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n;
        let m = 2 * n;
        let z = standard_normals(rng, m);
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        v[0] = Complex64::new(self.sqrt_eig[0] * z[0], 0.0);
        v[n] = Complex64::new(self.sqrt_eig[n] * z[1], 0.0);
        for k in 1..n {
            let s = self.sqrt_eig[k] * std::f64::consts::FRAC_1_SQRT_2;
            let c = Complex64::new(s * z[2 * k], s * z[2 * k + 1]);
            v[k] = c;
            v[m - k] = c.conj();
        }
        self.fft.process(&mut v);
        let norm = 1.0 / (m as f64).sqrt();
        let mut path = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        path.push(acc);
        for c in v.iter().take(n) {
            acc += c.re * norm;
            path.push(acc);
        }
        path
    }
}

/// Outcome of [`fbm_path_circulant`]: the path and whether the dense
/// fallback was used.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSample {
    pub path: Vec<f64>,
    pub fallback: bool,
}

/// fBm path 0 for `seed` by circulant embedding; falls back to the Cholesky
/// sampler if the embedding is not nonnegative definite.
pub fn fbm_path_circulant(
    hurst: f64,
    grid: TimeGrid,
    seed: u64,
) -> Result<CirculantSample, NoiseError> {
    let mut rng = PathSeed::new(seed, 0).fbm_rng();
    match FbmCirculant::new(hurst, grid) {
        Ok(c) => Ok(CirculantSample {
            path: c.sample(&mut rng),
            fallback: false,
        }),
        Err(NoiseError::NegativeEigenvalues { .. }) => Ok(CirculantSample {
            path: FbmCholesky::new(hurst, grid)?.sample(&mut rng),
            fallback: true,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_nonnegative_for_persistent_noise() {
        for h in [0.55, 0.7, 0.9, 0.99] {
            let g = TimeGrid::over(1.0, 500).unwrap();
            let c = FbmCirculant::new(h, g).unwrap();
            assert!(c.sqrt_eig.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn increment_variance_matches_fgn() {
        // Var of one fGn increment is dt^{2H}; averaged over many paths and
        // all increments.
        let h = 0.75;
        let g = TimeGrid::over(1.0, 32).unwrap();
        let c = FbmCirculant::new(h, g).unwrap();
        let paths = 4000;
        let mut sum = 0.0;
        let mut count = 0.0;
        for i in 0..paths {
            let p = c.sample(&mut PathSeed::new(3, i).fbm_rng());
            for w in p.windows(2) {
                sum += (w[1] - w[0]).powi(2);
                count += 1.0;
            }
        }
        let want = g.dt().powf(2.0 * h);
        assert!(
            ((sum / count) / want - 1.0).abs() < 0.03,
            "{}",
            sum / count / want
        );
    }

    #[test]
    fn free_function_reports_no_fallback() {
        let g = TimeGrid::over(1.0, 100).unwrap();
        let s = fbm_path_circulant(0.6, g, 9).unwrap();
        assert!(!s.fallback);
        assert_eq!(s.path.len(), 101);
    }
}
