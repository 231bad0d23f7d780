//! Closed-form bounds on the probability that the upper quenching-time bound
//! fires before `T`, and a lower bound on finite-time quenching.

use super::pathwise::SpecialCoefficients;
use super::BoundsError;
use crate::config::{DenominatorVariant, TailVariant};
use crate::noise::{Dependence, VolterraKernel};
use crate::quad::{integrate, Tolerance};
use serde::Serialize;

/// A probability bound after clipping to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbBound {
    pub value: f64,
    /// The hypothesis of the bound failed and the trivial value was returned.
    pub vacuous: bool,
    /// The raw formula fell outside `[0, 1]`.
    pub clipped: bool,
}

impl ProbBound {
    fn clip(raw: f64) -> Self {
        if raw.is_nan() || raw > 1.0 {
            Self {
                value: 1.0,
                vacuous: false,
                clipped: true,
            }
        } else if raw < 0.0 {
            Self {
                value: 0.0,
                vacuous: false,
                clipped: true,
            }
        } else {
            Self {
                value: raw,
                vacuous: false,
                clipped: false,
            }
        }
    }

    fn vacuous(value: f64) -> Self {
        Self {
            value,
            vacuous: true,
            clipped: false,
        }
    }
}

/// Law of the Gaussian exponent `ρ₁W(s) + ρ₂B^H(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentLaw {
    pub rho1: f64,
    pub rho2: f64,
    pub hurst: f64,
    /// `Cov(W(s), B^H(s)) = cross · s^{H+1/2}`; zero for independent drivers.
    pub cross: f64,
}

impl ExponentLaw {
    pub fn new(coeffs: &SpecialCoefficients, dependence: Dependence) -> Result<Self, BoundsError> {
        let (rho1, rho2) = coeffs.symmetric_rhos()?;
        let cross = match dependence {
            Dependence::Independent => 0.0,
            Dependence::Volterra => VolterraKernel::new(coeffs.hurst)?.unit_mean()?,
        };
        Ok(Self {
            rho1,
            rho2,
            hurst: coeffs.hurst,
            cross,
        })
    }

    pub fn variance(&self, s: f64) -> f64 {
        let h = self.hurst;
        self.rho1 * self.rho1 * s
            + self.rho2 * self.rho2 * s.powf(2.0 * h)
            + 2.0 * self.rho1 * self.rho2 * self.cross * s.powf(h + 0.5)
    }

    /// `E[exp(ρ₁W(s) + ρ₂B^H(s))]`.
    pub fn mgf(&self, s: f64) -> f64 {
        (0.5 * self.variance(s)).exp()
    }
}

fn quad(f: impl FnMut(f64) -> f64, t: f64) -> Result<f64, BoundsError> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(integrate(f, 0.0, t, Tolerance::new(0.0, 1e-12))?)
}

/// `m₀(T) = ∫₀ᵀ e^{σs} E[e^{ρ₁W(s)+ρ₂B^H(s)}] ds`.
pub fn m0_of_t(
    t: f64,
    coeffs: &SpecialCoefficients,
    dependence: Dependence,
) -> Result<f64, BoundsError> {
    let law = ExponentLaw::new(coeffs, dependence)?;
    let sigma = coeffs.sigma;
    quad(|s| (sigma * s + 0.5 * law.variance(s)).exp(), t)
}

/// `M(T) = 2ρ₁²T + 2ρ₂²T^{2H}`, the bound on the squared derivative norm of
/// the exponent.
pub fn derivative_bound(t: f64, coeffs: &SpecialCoefficients) -> Result<f64, BoundsError> {
    let (r1, r2) = coeffs.symmetric_rhos()?;
    Ok(2.0 * r1 * r1 * t + 2.0 * r2 * r2 * t.powf(2.0 * coeffs.hurst))
}

/// Gaussian-type bound `2 exp{-(ln U - ln m₀)² / D}` on `P(τ^* ≤ T)`, with
/// `D = 2M(T)²` or `D = 2M(T)` depending on `variant`.
pub fn ub_prob_by_t(
    t: f64,
    coeffs: &SpecialCoefficients,
    dependence: Dependence,
    variant: DenominatorVariant,
) -> Result<ProbBound, BoundsError> {
    let m0 = m0_of_t(t, coeffs, dependence)?;
    let u = coeffs.level();
    if !(u > m0) {
        return Ok(ProbBound::vacuous(1.0));
    }
    let m = derivative_bound(t, coeffs)?;
    if m == 0.0 {
        // Deterministic exponent: the functional is at most m₀ < U by T.
        return Ok(ProbBound::clip(0.0));
    }
    let denom = match variant {
        DenominatorVariant::Display => 2.0 * m * m,
        DenominatorVariant::Malliavin => 2.0 * m,
    };
    let gap = u.ln() - m0.ln();
    Ok(ProbBound::clip(2.0 * (-gap * gap / denom).exp()))
}

/// Markov bound on `P(τ^* ≤ T)` for Volterra-coupled drivers:
/// `(6λ̃/E0³)[(e^{(ρ₁²+σ)T}-1)/(ρ₁²+σ) + ∫₀ᵀ e^{σs + cρ₂²s^{2H}} ds]` with
/// `c = 4` or `c = 2` depending on `variant`.
pub fn tail_bound_dependent(
    t: f64,
    coeffs: &SpecialCoefficients,
    variant: TailVariant,
) -> Result<ProbBound, BoundsError> {
    let (r1, r2) = coeffs.symmetric_rhos()?;
    let c = match variant {
        TailVariant::Proof => 4.0,
        TailVariant::Statement => 2.0,
    };
    let (sigma, h) = (coeffs.sigma, coeffs.hurst);
    let a = r1 * r1 + sigma;
    let first = if a.abs() < 1e-14 {
        t
    } else {
        (a * t).exp_m1() / a
    };
    let second = quad(|s| (sigma * s + c * r2 * r2 * s.powf(2.0 * h)).exp(), t)?;
    Ok(ProbBound::clip(
        6.0 / (12.0 * coeffs.level()) * (first + second),
    ))
}

/// Markov bound on `P(τ^* ≤ T)` for independent drivers:
/// `(12λ̃/E0³) ∫₀ᵀ exp{(ρ₁²/2+σ)s + (ρ₂²/2)s^{2H}} ds`.
pub fn tail_bound_independent(
    t: f64,
    coeffs: &SpecialCoefficients,
) -> Result<ProbBound, BoundsError> {
    let (r1, r2) = coeffs.symmetric_rhos()?;
    let (sigma, h) = (coeffs.sigma, coeffs.hurst);
    let v = quad(
        |s| ((0.5 * r1 * r1 + sigma) * s + 0.5 * r2 * r2 * s.powf(2.0 * h)).exp(),
        t,
    )?;
    Ok(ProbBound::clip(v / coeffs.level()))
}

/// Lower bound on the probability of finite-time quenching,
/// `1 - exp{-α²(L₁-1)² / D}` with
/// `D = ρ₁²(2α-1)^{2-1/α} ln(U+1)^{1/α-2} + 2ρ₂²α² ln(U+1)^{2H/α-2} ((α-H)/α)^{2-2H/α}`.
pub fn lb_quench_prob(
    alpha: f64,
    coeffs: &SpecialCoefficients,
    l1: f64,
) -> Result<ProbBound, BoundsError> {
    let h = coeffs.hurst;
    if !(alpha > h && alpha < 1.0) {
        return Err(BoundsError::AlphaOutOfRange { alpha, hurst: h });
    }
    if !(l1 >= 1.0) {
        return Err(BoundsError::InvalidL1(l1));
    }
    let (r1, r2) = coeffs.symmetric_rhos()?;
    let lu = coeffs.level().ln_1p();
    if !lu.is_finite() {
        return Ok(ProbBound::vacuous(0.0));
    }
    let denom = r1 * r1 * (2.0 * alpha - 1.0).powf(2.0 - 1.0 / alpha) * lu.powf(1.0 / alpha - 2.0)
        + 2.0
            * r2
            * r2
            * alpha
            * alpha
            * lu.powf(2.0 * h / alpha - 2.0)
            * ((alpha - h) / alpha).powf(2.0 - 2.0 * h / alpha);
    let num = alpha * alpha * (l1 - 1.0).powi(2);
    if denom == 0.0 {
        return Ok(ProbBound::clip(if num > 0.0 { 1.0 } else { 0.0 }));
    }
    Ok(ProbBound::clip(-(-num / denom).exp_m1()))
}
