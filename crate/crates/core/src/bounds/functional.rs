//! Running integrals of `exp(l(s))` where `l` is known on a uniform grid.
//!
//! Between nodes the exponent is taken piecewise linear, which makes each
//! step integrable in closed form. Everything is kept in log space so the
//! integrand may range over hundreds of orders of magnitude.

/// Largest representable running integral; beyond it the value is capped and
/// flagged.
pub const SATURATION: f64 = 1e300;

/// `ln(e^a + e^b)`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln ∫₀^dt exp(l0 + (l1 - l0) s / dt) ds`.
pub(crate) fn log_step_integral(l0: f64, l1: f64, dt: f64) -> f64 {
    let d = (l1 - l0).abs();
    // (1 - e^{-d}) / d, continued to 1 at d = 0.
    let shape = if d < 1e-8 {
        1.0 - 0.5 * d
    } else {
        -(-d).exp_m1() / d
    };
    dt.ln() + l0.max(l1) + shape.ln()
}

/// `I(t_k) = ∫₀^{t_k} exp(l(s)) ds` for every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFunctional {
    dt: f64,
    log_integrand: Vec<f64>,
    ln_integral: Vec<f64>,
    saturated: bool,
}

impl ExpFunctional {
    /// `log_integrand[k] = l(t_k)`.
    pub fn new(log_integrand: Vec<f64>, dt: f64) -> Self {
        let ln_cap = SATURATION.ln();
        let mut ln_integral = Vec::with_capacity(log_integrand.len());
        let mut saturated = false;
        let mut acc = f64::NEG_INFINITY;
        ln_integral.push(acc);
        for pair in log_integrand.windows(2) {
            if !saturated {
                acc = log_add(acc, log_step_integral(pair[0], pair[1], dt));
                if !(acc <= ln_cap) {
                    acc = ln_cap;
                    saturated = true;
                }
            }
            ln_integral.push(acc);
        }
        Self {
            dt,
            log_integrand,
            ln_integral,
            saturated,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.ln_integral.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_integral.is_empty()
    }

    /// True if the integral exceeded [`SATURATION`] somewhere on the grid;
    /// later values are then held at the cap.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn ln_value(&self, k: usize) -> f64 {
        self.ln_integral[k]
    }

    pub fn value(&self, k: usize) -> f64 {
        self.ln_integral[k].exp()
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln_integral
    }

    pub fn log_integrand(&self) -> &[f64] {
        &self.log_integrand
    }

    /// First time the running integral reaches `level`, resolved inside the
    /// crossing step. `None` if the level is not reached on the grid.
    pub fn first_passage(&self, level: f64) -> Option<f64> {
        if level <= 0.0 {
            return Some(0.0);
        }
        if !level.is_finite() {
            return None;
        }
        let ln_level = level.ln();
        let k = self.ln_integral.iter().position(|&v| v >= ln_level)?;
        let j = k - 1;
        let (l0, l1) = (self.log_integrand[j], self.log_integrand[k]);
        let rem = level - self.ln_integral[j].exp();
        let a = (l1 - l0) / self.dt;
        // Solve ∫₀^θ exp(l0 + a s) ds = rem.
        let scaled = rem * (-l0).exp();
        let theta = if (a * self.dt).abs() < 1e-12 {
            scaled
        } else {
            let arg = a * scaled;
            if arg <= -1.0 {
                self.dt
            } else {
                arg.ln_1p() / a
            }
        };
        let theta = if theta.is_finite() {
            theta.clamp(0.0, self.dt)
        } else {
            self.dt
        };
        Some(j as f64 * self.dt + theta)
    }
}

/// `∫₀^{t_upto} exp(ρ₁W + ρ₂B^H + σs) ds` with the saturation flag.
pub fn exp_functional(
    w: &[f64],
    bh: &[f64],
    rho1: f64,
    rho2: f64,
    sigma: f64,
    upto: usize,
    dt: f64,
) -> (f64, bool) {
    let f = functional_of(w, bh, rho1, rho2, sigma, dt);
    let k = upto.min(f.len() - 1);
    (f.value(k), f.saturated())
}

/// The whole running integral of `exp(ρ₁W + ρ₂B^H + σs)`.
pub fn functional_of(
    w: &[f64],
    bh: &[f64],
    rho1: f64,
    rho2: f64,
    sigma: f64,
    dt: f64,
) -> ExpFunctional {
    assert_eq!(w.len(), bh.len(), "paths must share a grid");
    let l = w
        .iter()
        .zip(bh)
        .enumerate()
        .map(|(k, (&w, &b))| rho1 * w + rho2 * b + sigma * k as f64 * dt)
        .collect();
    ExpFunctional::new(l, dt)
}
