use super::{standard_normals, PathSeed, TimeGrid};
use rand::Rng;

pub(crate) fn increments_from<R: Rng>(rng: &mut R, grid: TimeGrid) -> Vec<f64> {
    let scale = grid.dt().sqrt();
    let mut dw = standard_normals(rng, grid.n_steps());
    dw.iter_mut().for_each(|z| *z *= scale);
    dw
}

pub(crate) fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut path = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    path.push(acc);
    for d in increments {
        acc += d;
        path.push(acc);
    }
    path
}

/// Brownian increments of path 0 for `seed`.
pub fn brownian_increments(grid: TimeGrid, seed: u64) -> Vec<f64> {
    increments_from(&mut PathSeed::new(seed, 0).brownian_rng(), grid)
}

/// Standard Brownian motion on the grid, `W(0) = 0`.
pub fn brownian_path(grid: TimeGrid, seed: u64) -> Vec<f64> {
    cumulative(&brownian_increments(grid, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_path() {
        let g = TimeGrid::over(1.0, 100).unwrap();
        assert_eq!(brownian_path(g, 11), brownian_path(g, 11));
        assert_ne!(brownian_path(g, 11), brownian_path(g, 12));
    }

    #[test]
    fn terminal_variance_matches_horizon() {
        let g = TimeGrid::over(2.0, 16).unwrap();
        let n = 20_000;
        let mut sum_sq = 0.0;
        for i in 0..n {
            let dw = increments_from(&mut PathSeed::new(5, i).brownian_rng(), g);
            let w: f64 = dw.iter().sum();
            sum_sq += w * w;
        }
        let var = sum_sq / n as f64;
        // SE of the sample second moment of N(0, 2) is 2 sqrt(2/n).
        assert!(
            (var - 2.0).abs() < 4.0 * 2.0 * (2.0 / n as f64).sqrt(),
            "{var}"
        );
    }
}
