//! Monte Carlo check of the Gaussian exponent law used by the probability
//! bounds, in both dependence modes.

use quench::bounds::{ExponentLaw, SpecialCoefficients};
use quench::noise::{Dependence, FbmMethod, NoiseSampler, PathSeed, TimeGrid};

fn check(dependence: Dependence, seed: u64) {
    let (h, k) = (0.75, 0.2);
    let coeffs = SpecialCoefficients::from_parts(h, [[k; 2]; 2], [[1.0; 2]; 2], 1.0, 1.0);
    let law = ExponentLaw::new(&coeffs, dependence).unwrap();
    let (rho1, rho2) = (law.rho1, law.rho2);
    let grid = TimeGrid::over(1.0, 64).unwrap();
    let sampler = NoiseSampler::new(grid, h, dependence, FbmMethod::Circulant).unwrap();
    let idx = [16, 32, 48, 64];
    let n = 100_000u64;
    let mut sums = [[0.0f64; 2]; 4];
    for i in 0..n {
        let p = sampler.sample(PathSeed::new(seed, i));
        for (slot, &j) in idx.iter().enumerate() {
            let v = (rho1 * p.w[j] + rho2 * p.bh[j]).exp();
            sums[slot][0] += v;
            sums[slot][1] += v * v;
        }
    }
    for (slot, &j) in idx.iter().enumerate() {
        let mean = sums[slot][0] / n as f64;
        let var = sums[slot][1] / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        let exact = law.mgf(grid.t(j));
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "{dependence:?} t={}: {mean} vs {exact} (se {se})",
            grid.t(j)
        );
    }
}

#[test]
fn independent_exponent_matches_mgf() {
    check(Dependence::Independent, 21);
}

#[test]
fn volterra_exponent_matches_mgf() {
    check(Dependence::Volterra, 22);
}
