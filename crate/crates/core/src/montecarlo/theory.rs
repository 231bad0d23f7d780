use super::MonteCarloError;
use crate::bounds::{
    derivative_bound, estimate_l1, lb_quench_prob, m0_of_t, tail_bound_dependent,
    tail_bound_independent, ub_prob_by_t, L1Estimate, ProbBound, SpecialCoefficients,
};
use crate::config::RunConfig;
use crate::noise::{Dependence, NoiseSampler, TimeGrid};
use crate::spectral::solve_robin_eigenpair;
use serde::Serialize;

/// Added to the run seed for the `L₁` paths so they do not reuse the
/// ensemble's noise.
pub const L1_SEED_OFFSET: u64 = 0x4c31_0000_0000;

/// Every path-independent bound of one configuration at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub horizon: f64,
    pub dependence: Dependence,
    pub coeffs: Option<SpecialCoefficients>,
    pub m0: Option<f64>,
    pub derivative_bound: Option<f64>,
    /// Gaussian concentration bound on `P(τ^* ≤ T)`.
    pub upper_malliavin: Option<ProbBound>,
    /// Markov bound on `P(τ^* ≤ T)` for the configured dependence.
    pub upper_markov: Option<ProbBound>,
    pub l1: Option<L1Estimate>,
    pub alpha: f64,
    /// Lower bound on `P(τ_q < ∞)`.
    pub lower: Option<ProbBound>,
    /// `H > 3/4`, independent drivers and `ρ₁ = ρ₂ ≠ 0`.
    pub almost_sure_applicable: bool,
    pub notes: Vec<String>,
}

impl TheoryReport {
    /// `alpha` overrides the run file's exponent for the lower bound.
    pub fn evaluate(
        run: &RunConfig,
        horizon: f64,
        alpha: Option<f64>,
    ) -> Result<Self, MonteCarloError> {
        let sys = &run.system;
        let alpha = alpha.unwrap_or(run.alpha);
        let mut rep = Self {
            horizon,
            dependence: sys.dependence,
            coeffs: None,
            m0: None,
            derivative_bound: None,
            upper_malliavin: None,
            upper_markov: None,
            l1: None,
            alpha,
            lower: None,
            almost_sure_applicable: false,
            notes: Vec::new(),
        };
        if !sys.bounds_apply() {
            rep.notes
                .push("bounds need Robin data with beta_c = beta".into());
            return Ok(rep);
        }
        let pair =
            solve_robin_eigenpair(sys.beta, 1e-14).map_err(crate::bounds::BoundsError::from)?;
        let coeffs = SpecialCoefficients::new(sys, &pair);
        let Ok((r1, r2)) = coeffs.symmetric_rhos() else {
            rep.notes
                .push("probability bounds need k21 = k11 and k22 = k12".into());
            rep.coeffs = Some(coeffs);
            return Ok(rep);
        };
        rep.almost_sure_applicable = sys.hurst > 0.75
            && sys.dependence == Dependence::Independent
            && r1 != 0.0
            && (r1 - r2).abs() <= 1e-12;
        rep.m0 = Some(m0_of_t(horizon, &coeffs, sys.dependence)?);
        rep.derivative_bound = Some(derivative_bound(horizon, &coeffs)?);
        rep.upper_malliavin = Some(ub_prob_by_t(
            horizon,
            &coeffs,
            sys.dependence,
            run.variants.denominator,
        )?);
        rep.upper_markov = Some(match sys.dependence {
            Dependence::Volterra => tail_bound_dependent(horizon, &coeffs, run.variants.tail)?,
            Dependence::Independent => tail_bound_independent(horizon, &coeffs)?,
        });
        if run.l1_paths > 0 {
            let steps = ((run.l1_t_max / sys.dt()).round() as usize).max(1);
            let grid = TimeGrid::over(run.l1_t_max, steps)?;
            let sampler = NoiseSampler::new(grid, sys.hurst, sys.dependence, sys.fbm_method)?;
            let l1 = estimate_l1(
                alpha,
                &coeffs,
                &sampler,
                run.l1_paths,
                run.seed.wrapping_add(L1_SEED_OFFSET),
            )?;
            if l1.truncation_warning {
                rep.notes.push(format!(
                    "L1 supremum attained at t_max = {} on {:.0}% of paths",
                    l1.t_max,
                    100.0 * l1.truncated_share
                ));
            }
            if l1.mean < 1.0 {
                rep.notes
                    .push(format!("L1 estimate {} below 1 was raised to 1", l1.mean));
            }
            rep.lower = Some(lb_quench_prob(alpha, &coeffs, l1.mean.max(1.0))?);
            rep.l1 = Some(l1);
        }
        rep.coeffs = Some(coeffs);
        Ok(rep)
    }

    /// `(quantity, value, flags)` rows.
    pub fn rows(&self) -> Vec<(String, f64, String)> {
        let mut out = vec![("horizon".to_string(), self.horizon, String::new())];
        if let Some(c) = &self.coeffs {
            out.push(("chi".into(), c.chi, String::new()));
            out.push(("sigma".into(), c.sigma, String::new()));
            out.push(("k2".into(), c.k2, String::new()));
            out.push(("lambda_tilde".into(), c.lambda_tilde, String::new()));
            out.push(("e0".into(), c.e0, String::new()));
            out.push(("level".into(), c.level(), String::new()));
            if let (Some(r1), Some(r2)) = (c.rho1, c.rho2) {
                out.push(("rho1".into(), r1, String::new()));
                out.push(("rho2".into(), r2, String::new()));
            }
        }
        let opt = |out: &mut Vec<(String, f64, String)>, name: &str, v: Option<f64>| {
            if let Some(v) = v {
                out.push((name.into(), v, String::new()));
            }
        };
        opt(&mut out, "m0", self.m0);
        opt(&mut out, "derivative_bound", self.derivative_bound);
        let prob = |out: &mut Vec<(String, f64, String)>, name: &str, b: Option<ProbBound>| {
            if let Some(b) = b {
                let mut f = Vec::new();
                if b.vacuous {
                    f.push("vacuous");
                }
                if b.clipped {
                    f.push("clipped");
                }
                out.push((name.into(), b.value, f.join(";")));
            }
        };
        prob(&mut out, "upper_tail_malliavin", self.upper_malliavin);
        prob(&mut out, "upper_tail_markov", self.upper_markov);
        if let Some(l1) = &self.l1 {
            let flag = if l1.truncation_warning {
                "truncated"
            } else {
                ""
            };
            out.push(("alpha".into(), self.alpha, String::new()));
            out.push(("l1_estimate".into(), l1.mean, flag.into()));
            out.push(("l1_std_error".into(), l1.std_error, String::new()));
            out.push(("l1_t_max".into(), l1.t_max, String::new()));
        }
        prob(&mut out, "lower_finite_time", self.lower);
        out
    }
}
