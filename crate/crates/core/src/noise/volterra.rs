//! Volterra kernel of fBm with respect to Brownian motion and the dependent
//! driver built from it.
//!
//! The kernel is self-similar, `K(t, s) = t^{H-1/2} k(s/t)` with `k = K(1, .)`,
//! and factors as
//!
//! `K(t, s) = g(s/t) (t/s)^{H-1/2} (t-s)^{H-1/2}`
//!
//! where `g` is bounded and smooth on `[0, 1]` (`g(0) = C_H / 2`). Fast
//! evaluation interpolates `g` from a table in the variable `y = x^{2H-1}`,
//! in which the leading `x^{2H-1}` behaviour at the origin becomes linear.

use super::{check_hurst, NoiseError, TimeGrid};
use crate::quad::{integrate, QuadError, Tolerance};

const TABLE_NODES: usize = 4097;
const CACHE_MAX_STEPS: usize = 2048;

fn inner_tol() -> Tolerance {
    Tolerance::new(1e-15, 1e-13)
}

/// `g` without the constant: `1 - (H - 1/2) Q(x)` where
/// `Q(x) = (1-x)^{1/2-H} ∫_x^1 u^{H-3/2} (u-x)^{H-1/2} du`.
fn g_unscaled(h: f64, x: f64) -> Result<f64, QuadError> {
    if x >= 1.0 {
        return Ok(1.0);
    }
    let q = 1.0 / (2.0 * h - 1.0);
    // After u = x + (1-x) v and v = w^q the integrand is bounded at w = 0.
    let f = |w: f64| {
        if w <= 0.0 {
            return if x == 0.0 { q } else { 0.0 };
        }
        let v = w.powf(q);
        q * w.powf(q - 1.0 + q * (h - 0.5)) * (x + (1.0 - x) * v).powf(h - 1.5)
    };
    let integral = if x == 0.0 {
        q
    } else {
        integrate(f, 0.0, 1.0, inner_tol())?
    };
    Ok(1.0 - (h - 0.5) * (1.0 - x) * integral)
}

/// Unnormalised `k(x) = K(1, x)` evaluated directly.
fn k_unscaled(h: f64, x: f64) -> Result<f64, QuadError> {
    Ok(g_unscaled(h, x)? * x.powf(0.5 - h) * (1.0 - x).powf(h - 0.5))
}

/// Normalising constant `C_H` fixed by `∫_0^1 K(1, s)^2 ds = 1`.
pub fn volterra_constant(hurst: f64) -> Result<f64, NoiseError> {
    check_hurst(hurst)?;
    let h = hurst;
    // x = y^p with p = 1/(1-H) makes x^{1-2H} dx regular at the origin.
    let p = 1.0 / (1.0 - h);
    let mut failure = None;
    let norm = integrate(
        |y: f64| {
            if y <= 0.0 {
                return 0.0;
            }
            let x = y.powf(p);
            match k_unscaled(h, x) {
                Ok(k) => p * y.powf(p - 1.0) * k * k,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        Tolerance::new(1e-14, 1e-13),
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(1.0 / norm.sqrt())
}

/// `K^H(t, s)` for `0 < s < t`, evaluated with adaptive quadrature.
pub fn volterra_kernel(hurst: f64, t: f64, s: f64) -> Result<f64, NoiseError> {
    let c = volterra_constant(hurst)?;
    kernel_with_constant(hurst, c, t, s)
}

fn kernel_with_constant(h: f64, c: f64, t: f64, s: f64) -> Result<f64, NoiseError> {
    if !(s > 0.0 && s < t) {
        return Ok(0.0);
    }
    let g = g_unscaled(h, s / t)?;
    Ok(c * g * (t / s).powf(h - 0.5) * (t - s).powf(h - 0.5))
}

/// Kernel with its normalising constant and interpolation table.
#[derive(Debug, Clone)]
pub struct VolterraKernel {
    hurst: f64,
    c_h: f64,
    table: Vec<f64>,
}

impl VolterraKernel {
    pub fn new(hurst: f64) -> Result<Self, NoiseError> {
        let c_h = volterra_constant(hurst)?;
        let q = 1.0 / (2.0 * hurst - 1.0);
        let last = (TABLE_NODES - 1) as f64;
        let table = (0..TABLE_NODES)
            .map(|i| {
                let x = (i as f64 / last).powf(q);
                g_unscaled(hurst, x).map(|g| c_h * g)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { hurst, c_h, table })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn constant(&self) -> f64 {
        self.c_h
    }

    fn g(&self, x: f64) -> f64 {
        let h = self.hurst;
        let y = x.powf(2.0 * h - 1.0);
        let last = TABLE_NODES - 1;
        let pos = y * last as f64;
        // Below the second node the table cannot resolve the x^1 term when
        // 1/(2H-1) is not an integer; fall back to quadrature there.
        if pos < 2.0 {
            return match g_unscaled(h, x) {
                Ok(g) => self.c_h * g,
                Err(_) => self.table[0],
            };
        }
        let i = (pos.floor() as usize).clamp(1, last - 2);
        let u = pos - i as f64;
        let (f0, f1, f2, f3) = (
            self.table[i - 1],
            self.table[i],
            self.table[i + 1],
            self.table[i + 2],
        );
        // Cubic Lagrange through nodes i-1..i+2, local coordinate u at node i.
        let a = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let b = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let c = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let d = (u + 1.0) * u * (u - 1.0) / 6.0;
        a * f0 + b * f1 + c * f2 + d * f3
    }

    /// `K(1, x)` from the table.
    pub fn unit(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        let h = self.hurst;
        self.g(x) * x.powf(0.5 - h) * (1.0 - x).powf(h - 0.5)
    }

    /// `K(t, s)` from the table; zero outside `0 < s < t`.
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        if !(s > 0.0 && s < t) {
            return 0.0;
        }
        t.powf(self.hurst - 0.5) * self.unit(s / t)
    }

    /// `K(t, s)` by direct quadrature.
    pub fn eval_exact(&self, t: f64, s: f64) -> Result<f64, NoiseError> {
        kernel_with_constant(self.hurst, self.c_h, t, s)
    }

    /// `∫_0^1 K(1, x) dx`, so that `E[W(s) B^H(s)] = c s^{H+1/2}` in the
    /// dependent construction.
    pub fn unit_mean(&self) -> Result<f64, NoiseError> {
        let h = self.hurst;
        let p = 1.0 / (1.0 - h);
        let v = integrate(
            |y: f64| {
                if y <= 0.0 {
                    return 0.0;
                }
                let x = y.powf(p);
                p * y.powf(p - 1.0) * self.unit(x)
            },
            0.0,
            1.0,
            Tolerance::new(1e-13, 1e-11),
        )?;
        Ok(v)
    }
}

/// Dependent fBm `B^H[k] = Σ_{j<k} K(t_k, t_{j+1/2}) ΔW_j`.
#[derive(Debug, Clone)]
pub struct VolterraFbm {
    kernel: VolterraKernel,
    grid: TimeGrid,
    // Packed rows k = 1..=n with k weights each, when the grid is small.
    weights: Option<Vec<f64>>,
}

impl VolterraFbm {
    pub fn new(hurst: f64, grid: TimeGrid) -> Result<Self, NoiseError> {
        let kernel = VolterraKernel::new(hurst)?;
        Ok(Self::with_kernel(kernel, grid))
    }

    pub fn with_kernel(kernel: VolterraKernel, grid: TimeGrid) -> Self {
        let n = grid.n_steps();
        let weights = (n <= CACHE_MAX_STEPS).then(|| {
            let mut w = Vec::with_capacity(n * (n + 1) / 2);
            for k in 1..=n {
                w.extend((0..k).map(|j| Self::weight(&kernel, grid, k, j)));
            }
            w
        });
        Self {
            kernel,
            grid,
            weights,
        }
    }

    fn weight(kernel: &VolterraKernel, grid: TimeGrid, k: usize, j: usize) -> f64 {
        kernel.eval(grid.t(k), (j as f64 + 0.5) * grid.dt())
    }

    pub fn kernel(&self) -> &VolterraKernel {
        &self.kernel
    }

    /// Applies the representation to increments of length `n_steps`.
    pub fn apply(&self, dw: &[f64]) -> Vec<f64> {
        let n = self.grid.n_steps();
        debug_assert_eq!(dw.len(), n);
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        match &self.weights {
            Some(w) => {
                let mut start = 0;
                for k in 1..=n {
                    let row = &w[start..start + k];
                    out.push(row.iter().zip(dw).map(|(a, b)| a * b).sum());
                    start += k;
                }
            }
            None => {
                for k in 1..=n {
                    out.push(
                        (0..k)
                            .map(|j| Self::weight(&self.kernel, self.grid, k, j) * dw[j])
                            .sum(),
                    );
                }
            }
        }
        out
    }
}

/// Builds the dependent fBm from Brownian increments.
pub fn fbm_from_brownian(
    hurst: f64,
    w_increments: &[f64],
    grid: TimeGrid,
) -> Result<Vec<f64>, NoiseError> {
    if w_increments.len() != grid.n_steps() {
        return Err(NoiseError::LengthMismatch {
            expected: grid.n_steps(),
            got: w_increments.len(),
        });
    }
    Ok(VolterraFbm::new(hurst, grid)?.apply(w_increments))
}
