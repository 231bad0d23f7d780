use super::{check_hurst, standard_normals, NoiseError, PathSeed, TimeGrid};
use rand::Rng;

/// Largest grid the dense Cholesky sampler accepts.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// `E[B^H(s) B^H(t)] = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(h: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.abs().powf(e) + t.abs().powf(e) - (t - s).abs().powf(e))
}

/// Exact fBm sampler from the lower Cholesky factor of the covariance at
/// `t_1..t_n` (packed row-major lower triangle).
#[derive(Debug, Clone)]
pub struct FbmCholesky {
    n: usize,
    factor: Vec<f64>,
}

impl FbmCholesky {
    pub fn new(hurst: f64, grid: TimeGrid) -> Result<Self, NoiseError> {
        check_hurst(hurst)?;
        let n = grid.n_steps();
        if n > CHOLESKY_MAX_STEPS {
            return Err(NoiseError::GridTooLarge {
                n,
                max: CHOLESKY_MAX_STEPS,
            });
        }
        let row = |i: usize| i * (i + 1) / 2;
        let mut l = vec![0.0; row(n)];
        for i in 0..n {
            let ti = grid.t(i + 1);
            for j in 0..=i {
                let tj = grid.t(j + 1);
                let mut s = fbm_covariance(hurst, ti, tj);
                let (ri, rj) = (row(i), row(j));
                for k in 0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(NoiseError::NotPositiveDefinite { pivot: i });
                    }
                    l[ri + i] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(Self { n, factor: l })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let z = standard_normals(rng, self.n);
        let mut path = Vec::with_capacity(self.n + 1);
        path.push(0.0);
        let mut start = 0;
        for i in 0..self.n {
            let row = &self.factor[start..start + i + 1];
            path.push(row.iter().zip(&z).map(|(a, b)| a * b).sum());
            start += i + 1;
        }
        path
    }

    /// Path 0 for `seed`, drawn from the fBm stream.
    pub fn path(&self, seed: u64) -> Vec<f64> {
        self.sample(&mut PathSeed::new(seed, 0).fbm_rng())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_oversized_grid() {
        let g = TimeGrid::over(1.0, CHOLESKY_MAX_STEPS + 1).unwrap();
        assert!(matches!(
            FbmCholesky::new(0.7, g),
            Err(NoiseError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn factor_reproduces_covariance() {
        let g = TimeGrid::over(1.5, 12).unwrap();
        let c = FbmCholesky::new(0.8, g).unwrap();
        let row = |i: usize| i * (i + 1) / 2;
        for i in 0..12 {
            for j in 0..=i {
                let s: f64 = (0..=j)
                    .map(|k| c.factor[row(i) + k] * c.factor[row(j) + k])
                    .sum();
                let want = fbm_covariance(0.8, g.t(i + 1), g.t(j + 1));
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn covariance_is_symmetric_with_variance_on_diagonal(h in 0.51f64..0.99, s in 0.0f64..5.0, t in 0.0f64..5.0) {
            prop_assert!((fbm_covariance(h, s, t) - fbm_covariance(h, t, s)).abs() < 1e-12);
            prop_assert!((fbm_covariance(h, t, t) - t.powf(2.0 * h)).abs() < 1e-12 * (1.0 + t.powf(2.0 * h)));
        }

        #[test]
        fn covariance_is_self_similar(h in 0.51f64..0.99, s in 0.01f64..3.0, t in 0.01f64..3.0, c in 0.1f64..10.0) {
            let lhs = fbm_covariance(h, c * s, c * t);
            let rhs = c.powf(2.0 * h) * fbm_covariance(h, s, t);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }
}
