use super::functional::{functional_of, log_add};
use super::pathwise::SpecialCoefficients;
use super::BoundsError;
use crate::noise::{NoiseSampler, PathSeed};
use rayon::prelude::*;
use serde::Serialize;

/// Share of paths whose supremum sits at the truncation time above which
/// the estimate is flagged.
pub const TRUNCATION_SHARE: f64 = 0.05;

/// Monte Carlo estimate of
/// `E sup_t [ln(∫₀ᵗ e^{σs+ρ₁W+ρ₂B^H} ds + 1) + t^α] / [ln(U+1) + t^α]`,
/// with the supremum taken over the sampler's grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub t_max: f64,
    /// Per path, the grid time at which the supremum was attained.
    pub argmax_times: Vec<f64>,
    pub truncated_share: f64,
    /// More than [`TRUNCATION_SHARE`] of paths peak at `t_max`, so the
    /// supremum over all `t ≥ 0` is likely larger.
    pub truncation_warning: bool,
}

/// Supremum of the ratio along one path and where it is attained.
fn path_sup(
    sampler: &NoiseSampler,
    seed: PathSeed,
    rho: (f64, f64),
    sigma: f64,
    alpha: f64,
    ln_u1: f64,
) -> (f64, usize) {
    let path = sampler.sample(seed);
    let grid = sampler.grid();
    let f = functional_of(&path.w, &path.bh, rho.0, rho.1, sigma, grid.dt());
    let mut best = (f64::NEG_INFINITY, 0);
    for k in 0..f.len() {
        let ta = grid.t(k).powf(alpha);
        let r = (log_add(f.ln_value(k), 0.0) + ta) / (ln_u1 + ta);
        if r > best.0 {
            best = (r, k);
        }
    }
    best
}

/// Paths use `PathSeed::new(seed, i)` for `i < n_paths`, evaluated in
/// parallel and reduced in index order.
pub fn estimate_l1(
    alpha: f64,
    coeffs: &SpecialCoefficients,
    sampler: &NoiseSampler,
    n_paths: usize,
    seed: u64,
) -> Result<L1Estimate, BoundsError> {
    if !(alpha > coeffs.hurst && alpha < 1.0) {
        return Err(BoundsError::AlphaOutOfRange {
            alpha,
            hurst: coeffs.hurst,
        });
    }
    if n_paths == 0 {
        return Err(BoundsError::NotApplicable(
            "L1 estimate needs at least one path".into(),
        ));
    }
    let rho = coeffs.symmetric_rhos()?;
    let ln_u1 = coeffs.level().ln_1p();
    let grid = sampler.grid();
    let sups: Vec<(f64, usize)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            path_sup(
                sampler,
                PathSeed::new(seed, i),
                rho,
                coeffs.sigma,
                alpha,
                ln_u1,
            )
        })
        .collect();
    let n = n_paths as f64;
    // Shifted by the first sample so identical paths give exactly zero spread.
    let x0 = sups[0].0;
    let (s1, s2) = sups.iter().fold((0.0, 0.0), |(a, b), s| {
        (a + (s.0 - x0), b + (s.0 - x0).powi(2))
    });
    let mean = x0 + s1 / n;
    let var = if n_paths > 1 {
        ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let last = grid.n_steps();
    let truncated_share = sups.iter().filter(|s| s.1 == last).count() as f64 / n;
    Ok(L1Estimate {
        mean,
        std_error: (var / n).sqrt(),
        n_paths,
        t_max: grid.horizon(),
        argmax_times: sups.iter().map(|s| grid.t(s.1)).collect(),
        truncated_share,
        truncation_warning: truncated_share > TRUNCATION_SHARE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{Dependence, FbmMethod, TimeGrid};

    fn setup(k: f64) -> (SpecialCoefficients, NoiseSampler) {
        let c = SpecialCoefficients::from_parts(0.6, [[k, k], [k, k]], [[1.0; 2]; 2], 1.0, 1.0);
        let s = NoiseSampler::new(
            TimeGrid::over(2.0, 400).unwrap(),
            0.6,
            Dependence::Independent,
            FbmMethod::Circulant,
        )
        .unwrap();
        (c, s)
    }

    #[test]
    fn no_noise_has_zero_spread() {
        let (c, s) = setup(0.0);
        let e = estimate_l1(0.8, &c, &s, 16, 1).unwrap();
        assert_eq!(e.std_error, 0.0);
        assert!(e.argmax_times.iter().all(|&t| t == e.argmax_times[0]));
    }

    #[test]
    fn estimate_is_at_least_one_within_noise() {
        let (c, s) = setup(0.1);
        let e = estimate_l1(0.8, &c, &s, 200, 3).unwrap();
        assert!(e.mean >= 1.0 - 2.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn standard_error_scales_with_paths() {
        let (c, s) = setup(0.2);
        let a = estimate_l1(0.8, &c, &s, 400, 7).unwrap();
        let b = estimate_l1(0.8, &c, &s, 800, 7).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((0.6..=0.85).contains(&ratio), "{ratio}");
    }

    #[test]
    fn positive_drift_pushes_sup_to_horizon() {
        let (c, s) = setup(0.05);
        let e = estimate_l1(0.8, &c, &s, 50, 2).unwrap();
        assert!(e.truncation_warning);
    }

    #[test]
    fn bad_alpha_is_rejected() {
        let (c, s) = setup(0.1);
        assert!(estimate_l1(0.55, &c, &s, 10, 0).is_err());
    }
}
