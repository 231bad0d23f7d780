//! Principal Robin eigenpair of `-d²/dx²` on `(0, 1)` and lower envelopes of
//! the heat semigroup.
//!
//! The principal eigenfunction is symmetric about `x = 1/2`,
//! `ψ(x) ∝ cos(r (x - 1/2))`, and the Robin condition at either end reads
//! `r tan(r/2) = β`. Writing `r = π - 2θ` turns this into
//! `β sin θ = (π - 2θ) cos θ` with a single root in `(0, π/2)`, free of
//! poles. For large `β` the root `θ ≈ π/β` is small and is kept as the
//! primary unknown so that the boundary values `ψ(0) = ψ(1) ∝ sin θ` carry
//! full relative precision.

use crate::config::InitialData;
use crate::fem::{FemError, FemMatrices};
use crate::noise::TimeGrid;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("Robin coefficient must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("characteristic equation has no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("profile is not positive inside (0, 1): value {value} at x = {x}")]
    NonPositiveProfile { x: f64, value: f64 },
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("heat solve failed: {0}")]
    Fem(#[from] FemError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinEigenpair {
    pub beta: f64,
    pub chi: f64,
    pub r: f64,
    /// `θ = π/2 - r/2`.
    pub theta: f64,
    /// Amplitude making `∫ψ = 1` for `ψ(x) = scale · sin(π y + θ (1 - 2y))`,
    /// `y = min(x, 1 - x)`.
    pub psi_scale: f64,
}

/// Smallest positive Robin eigenvalue with bisection to `|Δr| < tol`.
pub fn solve_robin_eigenpair(beta: f64, tol: f64) -> Result<RobinEigenpair, SpectralError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SpectralError::InvalidBeta(beta));
    }
    if !(tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(tol));
    }
    let (r, theta, cos_theta) = if beta >= 1.0 {
        let f = |t: f64| beta * t.sin() - (PI - 2.0 * t) * t.cos();
        // r = π - 2θ, so |Δr| = 2|Δθ|.
        let t = bisect(f, 0.0, FRAC_PI_2, 0.5 * tol)?;
        (PI - 2.0 * t, t, t.cos())
    } else {
        let f = |r: f64| r * (0.5 * r).sin() - beta * (0.5 * r).cos();
        let r = bisect(f, 0.0, PI, tol)?;
        (r, FRAC_PI_2 - 0.5 * r, (0.5 * r).sin())
    };
    Ok(RobinEigenpair {
        beta,
        chi: r * r,
        r,
        theta,
        psi_scale: r / (2.0 * cos_theta),
    })
}

fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, SpectralError> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if !(fa < 0.0 && fb > 0.0) {
        return Err(SpectralError::Bracket { lo, hi });
    }
    loop {
        let m = 0.5 * (a + b);
        // The width must also be small relative to the root: for large β the
        // root θ ≈ π/β is tiny and an absolute tolerance alone leaves the
        // boundary residual at the 1e-10 level.
        if (b - a < tol && b - a <= 4.0 * f64::EPSILON * m.abs()) || m <= a || m >= b {
            // Return whichever end has the smaller residual.
            return Ok(if f(a).abs() <= f(b).abs() { a } else { b });
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
}

impl RobinEigenpair {
    fn phase(&self, x: f64) -> (f64, f64) {
        let y = x.min(1.0 - x);
        let sign = if x <= 0.5 { 1.0 } else { -1.0 };
        (PI * y + self.theta * (1.0 - 2.0 * y), sign)
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.psi_scale * self.phase(x).0.sin()
    }

    pub fn dpsi(&self, x: f64) -> f64 {
        let (p, sign) = self.phase(x);
        sign * self.r * self.psi_scale * p.cos()
    }

    pub fn d2psi(&self, x: f64) -> f64 {
        -self.chi * self.psi(x)
    }

    /// `∫₀¹ ψ²`, closed form.
    pub fn psi_sq_integral(&self) -> f64 {
        let s = self.psi_scale;
        s * s * (0.5 + (2.0 * self.theta).sin() / (2.0 * self.r))
    }

    /// Minimum of `ψ` on a uniform grid of 10⁴ points plus both endpoints.
    pub fn psi_min(&self) -> f64 {
        (0..=10_000)
            .map(|i| self.psi(i as f64 / 10_000.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn psi_max(&self) -> f64 {
        (0..=10_000)
            .map(|i| self.psi(i as f64 / 10_000.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `|∫ψ - 1|` by composite Gauss–Legendre quadrature.
    pub fn normalization_residual(&self) -> f64 {
        let v = crate::quad::composite_gauss(|x| self.psi(x), 0.0, 1.0, 64, 10);
        (v - 1.0).abs()
    }

    /// `|-ψ'(0) + βψ(0)|` and `|ψ'(1) + βψ(1)|`.
    pub fn boundary_residuals(&self) -> (f64, f64) {
        let left = -self.dpsi(0.0) + self.beta * self.psi(0.0);
        let right = self.dpsi(1.0) + self.beta * self.psi(1.0);
        (left.abs(), right.abs())
    }

    /// `|-ψ''(x) - χψ(x)|`.
    pub fn ode_residual(&self, x: f64) -> f64 {
        (-self.d2psi(x) - self.chi * self.psi(x)).abs()
    }
}

/// `S_t ψ = e^{-χt} ψ`; returns the factor.
pub fn semigroup_on_eigenfunction(pair: &RobinEigenpair, t: f64) -> f64 {
    (-pair.chi * t).exp()
}

/// Initial profile `g = z(0, ·)` of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZProfile {
    /// `g = L ψ`.
    PsiMultiple(f64),
    /// `g(x) = a + c x (1 - x)`.
    Quadratic { a: f64, c: f64 },
}

impl ZProfile {
    /// Profile of `z_i(0) = 1 - u_i(0)` for component `i` (0 or 1).
    pub fn from_initial(initial: &InitialData, i: usize) -> Self {
        match *initial {
            InitialData::Parabolic(c) => ZProfile::Quadratic { a: 1.0, c: -c[i] },
            InitialData::Psi(l) => ZProfile::PsiMultiple(l[i]),
        }
    }

    pub fn eval(&self, pair: &RobinEigenpair, x: f64) -> f64 {
        match *self {
            ZProfile::PsiMultiple(l) => l * pair.psi(x),
            ZProfile::Quadratic { a, c } => a + c * x * (1.0 - x),
        }
    }

    fn check_positive(&self, pair: &RobinEigenpair) -> Result<(), SpectralError> {
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let v = self.eval(pair, x);
            let interior = i > 0 && i < 1000;
            if v < 0.0 || (interior && v <= 0.0) || !v.is_finite() {
                return Err(SpectralError::NonPositiveProfile { x, value: v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupMethod {
    EigenExact,
    FemNumeric,
}

impl SemigroupMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SemigroupMethod::EigenExact => "eigen_exact",
            SemigroupMethod::FemNumeric => "fem_numeric",
        }
    }
}

#[derive(Debug, Clone)]
enum MuData {
    /// `ln μ(t) = ln_amp - rate t`.
    Exact { ln_amp: f64, rate: f64 },
    /// `ln inf S_t g` at `t = j dt`, plus the Itô rate.
    Table {
        dt: f64,
        ln_min: Vec<f64>,
        rate: f64,
    },
}

/// `μ(t) = e^{-k²t/2} inf_x S_t g(x)`.
#[derive(Debug, Clone)]
pub struct SemigroupBound {
    pub method: SemigroupMethod,
    data: MuData,
}

/// Elements used by the numerical heat solve.
pub const HEAT_ELEMENTS: usize = 200;
const HEAT_MAX_SUBSTEP: f64 = 1e-3;

impl SemigroupBound {
    /// Exact for multiples of `ψ`; otherwise tabulated on `grid` from an
    /// implicit finite-element heat solve with homogeneous Robin data.
    pub fn new(
        pair: &RobinEigenpair,
        g: &ZProfile,
        k_i1: f64,
        grid: TimeGrid,
    ) -> Result<Self, SpectralError> {
        g.check_positive(pair)?;
        let rate = 0.5 * k_i1 * k_i1;
        match *g {
            ZProfile::PsiMultiple(l) => Ok(Self {
                method: SemigroupMethod::EigenExact,
                data: MuData::Exact {
                    ln_amp: (l * pair.psi_min()).ln(),
                    rate: rate + pair.chi,
                },
            }),
            ZProfile::Quadratic { .. } => {
                let fem = FemMatrices::assemble(
                    HEAT_ELEMENTS,
                    crate::config::BoundaryCondition::Robin,
                    pair.beta,
                    0.0,
                )?;
                let sub = (grid.dt() / HEAT_MAX_SUBSTEP).ceil().max(1.0) as usize;
                let h = grid.dt() / sub as f64;
                let lu = fem.system(h)?;
                let mut u: Vec<f64> = fem.nodes().iter().map(|&x| g.eval(pair, x)).collect();
                let mut scratch = vec![0.0; u.len()];
                let min_ln = |u: &[f64]| u.iter().cloned().fold(f64::INFINITY, f64::min).ln();
                let mut ln_min = Vec::with_capacity(grid.n_steps() + 1);
                ln_min.push(min_ln(&u));
                for _ in 0..grid.n_steps() {
                    for _ in 0..sub {
                        fem.heat_step(&lu, h, &mut u, &mut scratch);
                    }
                    ln_min.push(min_ln(&u));
                }
                Ok(Self {
                    method: SemigroupMethod::FemNumeric,
                    data: MuData::Table {
                        dt: grid.dt(),
                        ln_min,
                        rate,
                    },
                })
            }
        }
    }

    pub fn ln_mu(&self, t: f64) -> f64 {
        match &self.data {
            MuData::Exact { ln_amp, rate } => ln_amp - rate * t,
            MuData::Table { dt, ln_min, rate } => {
                let pos = t / dt;
                let j = (pos.floor() as usize).min(ln_min.len() - 1);
                let base = if j + 1 < ln_min.len() {
                    let w = pos - j as f64;
                    if w == 0.0 {
                        ln_min[j]
                    } else {
                        (1.0 - w) * ln_min[j] + w * ln_min[j + 1]
                    }
                } else {
                    ln_min[j]
                };
                base - rate * t
            }
        }
    }

    pub fn mu(&self, t: f64) -> f64 {
        self.ln_mu(t).exp()
    }
}

/// `μ(t)` for a single time; see [`SemigroupBound`].
pub fn mu_lower(
    pair: &RobinEigenpair,
    g: &ZProfile,
    k_i1: f64,
    t: f64,
) -> Result<f64, SpectralError> {
    if !(t >= 0.0) {
        return Err(SpectralError::NegativeTime(t));
    }
    let steps = ((t / HEAT_MAX_SUBSTEP).ceil() as usize).max(1);
    let grid = TimeGrid::over(t.max(f64::MIN_POSITIVE), steps)
        .map_err(|_| SpectralError::NegativeTime(t))?;
    let bound = SemigroupBound::new(pair, g, k_i1, grid)?;
    Ok(if t == 0.0 {
        bound.mu(0.0)
    } else {
        bound.mu(grid.horizon())
    })
}
