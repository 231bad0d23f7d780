use super::functional::ExpFunctional;
use super::BoundsError;
use crate::config::{InitialData, SystemConfig};
use crate::noise::{MixedNoise, TimeGrid};
use crate::quad::composite_gauss;
use crate::spectral::{solve_robin_eigenpair, RobinEigenpair, SemigroupBound, ZProfile};
use serde::Serialize;

const SYMMETRY_TOL: f64 = 1e-12;

/// Constants of the upper quenching-time bound, derived from the model and
/// the Robin eigenpair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialCoefficients {
    /// `rho[i][j] = 3 k_{ij}`; row `i` is the exponent of `e^{3N_{i+1}}`.
    pub rho: [[f64; 2]; 2],
    /// `ρ₁ = 3k₁₁` when `k₂₁ = k₁₁` and `k₂₂ = k₁₂`.
    pub rho1: Option<f64>,
    /// `ρ₂ = 3k₁₂` under the same condition.
    pub rho2: Option<f64>,
    pub hurst: f64,
    pub chi: f64,
    /// `min{k₁₁²/2, k₂₁²/2}`.
    pub k2: f64,
    /// `3(χ + k²)`.
    pub sigma: f64,
    /// `min{λ₁₁+λ₂₂, λ₁₂+λ₂₁}`.
    pub lambda_tilde: f64,
    /// `∫(g₁+g₂)ψ`.
    pub e0: f64,
}

impl SpecialCoefficients {
    pub fn from_parts(
        hurst: f64,
        k: [[f64; 2]; 2],
        lambda: [[f64; 2]; 2],
        chi: f64,
        e0: f64,
    ) -> Self {
        let symmetric =
            (k[1][0] - k[0][0]).abs() <= SYMMETRY_TOL && (k[1][1] - k[0][1]).abs() <= SYMMETRY_TOL;
        let k2 = (0.5 * k[0][0] * k[0][0]).min(0.5 * k[1][0] * k[1][0]);
        Self {
            rho: [
                [3.0 * k[0][0], 3.0 * k[0][1]],
                [3.0 * k[1][0], 3.0 * k[1][1]],
            ],
            rho1: symmetric.then_some(3.0 * k[0][0]),
            rho2: symmetric.then_some(3.0 * k[0][1]),
            hurst,
            chi,
            k2,
            sigma: 3.0 * (chi + k2),
            lambda_tilde: (lambda[0][0] + lambda[1][1]).min(lambda[0][1] + lambda[1][0]),
            e0,
        }
    }

    pub fn new(config: &SystemConfig, pair: &RobinEigenpair) -> Self {
        let g = [
            ZProfile::from_initial(&config.initial, 0),
            ZProfile::from_initial(&config.initial, 1),
        ];
        let e0 = composite_gauss(
            |x| (g[0].eval(pair, x) + g[1].eval(pair, x)) * pair.psi(x),
            0.0,
            1.0,
            16,
            10,
        );
        Self::from_parts(config.hurst, config.k, config.lambda, pair.chi, e0)
    }

    /// `U = E0³ / (12 λ̃)`; infinite when `λ̃ = 0`.
    pub fn level(&self) -> f64 {
        if self.lambda_tilde == 0.0 {
            f64::INFINITY
        } else {
            self.e0.powi(3) / (12.0 * self.lambda_tilde)
        }
    }

    /// `(ρ₁, ρ₂)`, or an error when the two components see different noise.
    pub fn symmetric_rhos(&self) -> Result<(f64, f64), BoundsError> {
        match (self.rho1, self.rho2) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(BoundsError::AsymmetricNoise { rho: self.rho }),
        }
    }
}

/// `λ_{i1} + λ_{i2}`.
fn row_sum(lambda: &[[f64; 2]; 2], i: usize) -> f64 {
    lambda[i][0] + lambda[i][1]
}

/// Running integral `∫₀ᵗ max{e^{3N_i}, e^{N_i+2N_j}} μ_i^{-3} dr`.
pub fn lower_functional(i: usize, noise: &MixedNoise, mu_i: &SemigroupBound) -> ExpFunctional {
    let (ni, nj) = if i == 0 {
        (&noise.n1, &noise.n2)
    } else {
        (&noise.n2, &noise.n1)
    };
    let dt = noise.grid.dt();
    let l = ni
        .iter()
        .zip(nj)
        .enumerate()
        .map(|(k, (&a, &b))| (3.0 * a).max(a + 2.0 * b) - 3.0 * mu_i.ln_mu(k as f64 * dt))
        .collect();
    ExpFunctional::new(l, dt)
}

/// `G_i = [1 - 4(λ_{i1}+λ_{i2}) ∫ ...]^{1/4}` at step `upto`; `None` once the
/// bracket is no longer positive.
pub fn script_g(
    i: usize,
    noise: &MixedNoise,
    mu_i: &SemigroupBound,
    lambda: &[[f64; 2]; 2],
    upto: usize,
) -> Option<f64> {
    let f = lower_functional(i, noise, mu_i);
    g_from(&f, row_sum(lambda, i), upto)
}

fn g_from(f: &ExpFunctional, lambda_row: f64, k: usize) -> Option<f64> {
    let bracket = 1.0 - 4.0 * lambda_row * f.value(k);
    (bracket > 0.0).then(|| bracket.powf(0.25))
}

fn passage(f: &ExpFunctional, lambda_row: f64) -> Option<f64> {
    if lambda_row <= 0.0 {
        None
    } else {
        f.first_passage(1.0 / (4.0 * lambda_row))
    }
}

/// First time either component's lower functional reaches
/// `1 / (4(λ_{i1}+λ_{i2}))`.
pub fn tau_star(
    noise: &MixedNoise,
    mu: [&SemigroupBound; 2],
    lambda: &[[f64; 2]; 2],
) -> Option<f64> {
    let t: Vec<f64> = (0..2)
        .filter_map(|i| passage(&lower_functional(i, noise, mu[i]), row_sum(lambda, i)))
        .collect();
    t.into_iter().reduce(f64::min)
}

fn sigma_ramp(noise: &MixedNoise, sigma: f64, exps: impl Fn(f64, f64) -> f64) -> ExpFunctional {
    let dt = noise.grid.dt();
    let l = noise
        .n1
        .iter()
        .zip(&noise.n2)
        .enumerate()
        .map(|(k, (&a, &b))| exps(a, b) + sigma * k as f64 * dt)
        .collect();
    ExpFunctional::new(l, dt)
}

/// `∫₀ᵗ min{e^{3N₁}, e^{3N₂}} e^{σs} ds`.
pub fn upper_functional(noise: &MixedNoise, coeffs: &SpecialCoefficients) -> ExpFunctional {
    sigma_ramp(noise, coeffs.sigma, |a, b| (3.0 * a).min(3.0 * b))
}

/// Upper quenching-time bound; requires `k₂₁ = k₁₁` and `k₂₂ = k₁₂`.
pub fn tau_upper(
    noise: &MixedNoise,
    coeffs: &SpecialCoefficients,
) -> Result<Option<f64>, BoundsError> {
    coeffs.symmetric_rhos()?;
    Ok(upper_functional(noise, coeffs).first_passage(coeffs.level()))
}

/// `∫₀ᵗ min{e^{3N₁}, e^{N₁+2N₂}, e^{3N₂}, e^{N₂+2N₁}} e^{σs} ds`.
pub fn double_star_functional(noise: &MixedNoise, coeffs: &SpecialCoefficients) -> ExpFunctional {
    sigma_ramp(noise, coeffs.sigma, |a, b| {
        (3.0 * a).min(a + 2.0 * b).min(3.0 * b).min(b + 2.0 * a)
    })
}

/// Upper quenching-time bound without the symmetry condition.
pub fn tau_double_star(noise: &MixedNoise, coeffs: &SpecialCoefficients) -> Option<f64> {
    double_star_functional(noise, coeffs).first_passage(coeffs.level())
}

/// `∫₀ᵗ max_i e^{3N_i} e^{σs} ds`, the integral in the upper rate envelope.
pub fn envelope_functional(noise: &MixedNoise, coeffs: &SpecialCoefficients) -> ExpFunctional {
    sigma_ramp(noise, coeffs.sigma, |a, b| (3.0 * a).max(3.0 * b))
}

/// Envelope data for initial data `g_i = C_i ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EnvelopeData {
    c0: f64,
    /// `((C₁+C₂) ∫ψ²)³`.
    i0_cube: f64,
    psi_min: f64,
}

/// Lower and upper bounds on `min_x min_i v_i(t, x)` with `v_i = e^{N_i} z_i`.
/// `None` marks an envelope whose bracket is no longer positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEnvelopes {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Everything the pathwise bounds need that does not depend on the path.
#[derive(Debug, Clone)]
pub struct BoundContext {
    pub pair: RobinEigenpair,
    pub coeffs: SpecialCoefficients,
    pub lambda: [[f64; 2]; 2],
    pub mu: [SemigroupBound; 2],
    pub grid: TimeGrid,
    envelope: Option<EnvelopeData>,
}

impl BoundContext {
    /// Requires Robin data with `β_c = β`, so that `z = 1 - u` satisfies the
    /// homogeneous Robin condition the bounds are stated for.
    pub fn new(config: &SystemConfig) -> Result<Self, BoundsError> {
        if !config.bounds_apply() {
            return Err(BoundsError::NotApplicable(
                "pathwise bounds need Robin boundary data with beta_c = beta".into(),
            ));
        }
        let pair = solve_robin_eigenpair(config.beta, 1e-14)?;
        let grid = config.grid();
        let mu = [0, 1].map(|i| {
            SemigroupBound::new(
                &pair,
                &ZProfile::from_initial(&config.initial, i),
                config.k[i][0],
                grid,
            )
        });
        let [m0, m1] = mu;
        let coeffs = SpecialCoefficients::new(config, &pair);
        let envelope = match config.initial {
            InitialData::Psi(c) => Some(EnvelopeData {
                c0: c[0].min(c[1]),
                i0_cube: ((c[0] + c[1]) * pair.psi_sq_integral()).powi(3),
                psi_min: pair.psi_min(),
            }),
            InitialData::Parabolic(_) => None,
        };
        Ok(Self {
            pair,
            coeffs,
            lambda: config.lambda,
            mu: [m0?, m1?],
            grid,
            envelope,
        })
    }

    pub fn evaluate(&self, noise: &MixedNoise) -> BoundReport {
        let lower = [0, 1].map(|i| lower_functional(i, noise, &self.mu[i]));
        let lambda_rows = [row_sum(&self.lambda, 0), row_sum(&self.lambda, 1)];
        let tau_star = (0..2)
            .filter_map(|i| passage(&lower[i], lambda_rows[i]))
            .reduce(f64::min);
        let level = self.coeffs.level();
        let upper_defined = self.coeffs.rho1.is_some();
        let tau_upper = if upper_defined {
            upper_functional(noise, &self.coeffs).first_passage(level)
        } else {
            None
        };
        let double = double_star_functional(noise, &self.coeffs);
        let envelope = envelope_functional(noise, &self.coeffs);
        let saturated =
            lower.iter().any(|f| f.saturated()) || double.saturated() || envelope.saturated();
        BoundReport {
            tau_star,
            tau_upper,
            upper_defined,
            tau_double_star: double.first_passage(level),
            lambda_rows,
            lower,
            envelope,
            decay: self.coeffs.chi + self.coeffs.k2,
            lambda_tilde: self.coeffs.lambda_tilde,
            envelope_data: self.envelope,
            saturated,
            rho: self.coeffs.rho,
        }
    }
}

/// Pathwise bounds of one realisation.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub tau_star: Option<f64>,
    /// Present only when the symmetry condition holds and the level is hit.
    pub tau_upper: Option<f64>,
    pub upper_defined: bool,
    pub tau_double_star: Option<f64>,
    /// Any running integral hit the saturation cap.
    pub saturated: bool,
    rho: [[f64; 2]; 2],
    lambda_rows: [f64; 2],
    lower: [ExpFunctional; 2],
    envelope: ExpFunctional,
    decay: f64,
    lambda_tilde: f64,
    envelope_data: Option<EnvelopeData>,
}

impl BoundReport {
    /// `G_i` at grid step `k`; `None` once depleted.
    pub fn g(&self, i: usize, k: usize) -> Option<f64> {
        g_from(&self.lower[i], self.lambda_rows[i], k)
    }

    /// `I(t_k)` from the upper rate envelope, for `g_i = C_i ψ` data.
    pub fn i_env(&self, k: usize) -> Result<Option<f64>, BoundsError> {
        let data = self.envelope_data.ok_or(BoundsError::NotPsiData)?;
        let bracket = data.i0_cube - 12.0 * self.lambda_tilde * self.envelope.value(k);
        Ok((bracket > 0.0).then(|| bracket.cbrt()))
    }

    /// Quenching-rate envelopes at grid step `k`.
    pub fn rate_envelopes(&self, k: usize) -> Result<RateEnvelopes, BoundsError> {
        let data = self.envelope_data.ok_or(BoundsError::NotPsiData)?;
        if !self.upper_defined {
            return Err(BoundsError::AsymmetricNoise { rho: self.rho });
        }
        let t = k as f64 * self.envelope.dt();
        let decay = (-self.decay * t).exp();
        let g = match (self.g(0, k), self.g(1, k)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        Ok(RateEnvelopes {
            lower: g.map(|g| data.c0 * data.psi_min * decay * g),
            upper: self.i_env(k)?.map(|i| 0.5 * decay * i),
        })
    }

    /// `τ* ≤ τ^*` whenever both are finite.
    pub fn satisfied_ordering(&self) -> bool {
        match (self.tau_star, self.tau_upper) {
            (Some(lo), Some(hi)) => lo <= hi,
            _ => true,
        }
    }
}
