//! Model and run configuration, parsed from a flat JSON document.
//!
//! Parsing collects every violation instead of stopping at the first one, so
//! a broken file can be fixed in a single pass.

use crate::noise::{Dependence, FbmMethod, TimeGrid};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// `∂u/∂ν + β u = β_c` on both endpoints.
    Robin,
    /// `u = 0` on both endpoints.
    Dirichlet,
}

/// Initial data for `u_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "coef")]
pub enum InitialData {
    /// `u_i(0, x) = c_i x (1 - x)`.
    Parabolic([f64; 2]),
    /// `z_i(0, x) = 1 - u_i(0, x) = L_i ψ(x)` with `ψ` the normalised Robin
    /// eigenfunction.
    Psi([f64; 2]),
}

/// Exponent of the fractional term in the dependent-driver tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailVariant {
    /// `4 ρ₂²`, as obtained in the derivation.
    Proof,
    /// `2 ρ₂²`, as printed in the statement.
    Statement,
}

/// Denominator of the Gaussian-type upper tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DenominatorVariant {
    /// `2 M(T)²`, as displayed with the bound.
    Display,
    /// `2 M(T)`, the concentration inequality for a functional whose
    /// derivative has squared norm at most `M(T)`.
    Malliavin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundVariants {
    pub tail: TailVariant,
    pub denominator: DenominatorVariant,
}

impl Default for BoundVariants {
    fn default() -> Self {
        Self {
            tail: TailVariant::Proof,
            denominator: DenominatorVariant::Display,
        }
    }
}

/// Every model constant plus the discretisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub hurst: f64,
    /// `lambda[i][j] = λ_{i+1, j+1}`.
    pub lambda: [[f64; 2]; 2],
    /// `k[i][0]` multiplies `W`, `k[i][1]` multiplies `B^H` in `N_{i+1}`.
    pub k: [[f64; 2]; 2],
    pub beta: f64,
    pub beta_c: f64,
    pub bc: BoundaryCondition,
    pub m_elements: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub initial: InitialData,
    pub eps_quench: f64,
    pub dependence: Dependence,
    pub fbm_method: FbmMethod,
}

impl SystemConfig {
    pub fn grid(&self) -> TimeGrid {
        TimeGrid::over(self.horizon, self.n_steps).expect("validated grid")
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// True when `k₂₁ = k₁₁` and `k₂₂ = k₁₂`, which makes `N₁ = N₂` and
    /// reduces the pathwise bounds to a single exponential functional.
    pub fn symmetric_noise(&self) -> bool {
        (self.k[1][0] - self.k[0][0]).abs() <= 1e-12 && (self.k[1][1] - self.k[0][1]).abs() <= 1e-12
    }

    /// The pathwise bounds are stated for `z = 1 - u` with homogeneous Robin
    /// data, which requires `β_c = β`.
    pub fn bounds_apply(&self) -> bool {
        self.bc == BoundaryCondition::Robin && (self.beta - self.beta_c).abs() <= 1e-12 * self.beta
    }

    /// Checks the invariants; returns every violation found.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errs = Vec::new();
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            errs.push(format!(
                "hurst = {} must lie in the open interval (1/2, 1)",
                self.hurst
            ));
        }
        for (i, row) in self.lambda.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    errs.push(format!(
                        "lambda[{i}][{j}] = {v} must be finite and nonnegative"
                    ));
                }
            }
        }
        for (i, row) in self.k.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    errs.push(format!("k[{i}][{j}] = {v} must be finite and nonnegative"));
                }
            }
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            errs.push(format!("beta = {} must be positive", self.beta));
        }
        if !(self.beta_c.is_finite() && self.beta_c >= 0.0) {
            errs.push(format!("beta_c = {} must be nonnegative", self.beta_c));
        }
        if self.m_elements < 3 {
            errs.push(format!("M = {} must be at least 3", self.m_elements));
        }
        if self.n_steps < 1 {
            errs.push("N must be at least 1".to_string());
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            errs.push(format!("T = {} must be positive", self.horizon));
        }
        if !(self.eps_quench > 0.0 && self.eps_quench < 0.5) {
            errs.push(format!(
                "eps_quench = {} must lie in (0, 0.5)",
                self.eps_quench
            ));
        }
        match self.initial {
            InitialData::Parabolic(c) => {
                for (i, &ci) in c.iter().enumerate() {
                    // max of c x(1-x) is c/4; need 0 <= u < 1.
                    if !(ci.is_finite() && (0.0..4.0).contains(&ci)) {
                        errs.push(format!(
                            "initial_coef[{i}] = {ci} must lie in [0, 4) so that 0 <= u < 1"
                        ));
                    }
                }
            }
            InitialData::Psi(l) => {
                for (i, &li) in l.iter().enumerate() {
                    if !(li.is_finite() && li > 0.0) {
                        errs.push(format!("initial_coef[{i}] = {li} must be positive"));
                    }
                }
                if self.bc != BoundaryCondition::Robin {
                    errs.push("initial = \"psi\" needs bc = \"robin\"".to_string());
                }
                if self.beta.is_finite() && self.beta > 0.0 && errs.is_empty() {
                    if let Ok(pair) = crate::spectral::solve_robin_eigenpair(self.beta, 1e-14) {
                        for (i, &li) in l.iter().enumerate() {
                            if li * pair.psi_max() > 1.0 {
                                errs.push(format!(
                                    "initial_coef[{i}] = {li} gives z(0) = L psi above 1 (psi max {:.6})",
                                    pair.psi_max()
                                ));
                            }
                        }
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errs))
        }
    }
}

/// Monte Carlo and bound settings that sit next to the model in a run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub variants: BoundVariants,
    /// Exponent for the finite-time lower bound, in `(H, 1)`.
    pub alpha: f64,
    pub l1_paths: usize,
    pub l1_t_max: f64,
    /// Horizons for the almost-sure trend check; each must not exceed `T`.
    pub horizons: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KNOWN_KEYS: &[&str] = &[
    "hurst",
    "lambda",
    "k",
    "beta",
    "beta_c",
    "bc",
    "M",
    "N",
    "T",
    "initial",
    "initial_coef",
    "eps_quench",
    "dependence",
    "fbm_method",
    "variant",
    "denominator",
    "alpha",
    "l1_paths",
    "l1_t_max",
    "horizons",
    "n_paths",
    "seed",
];

struct Reader<'a> {
    obj: &'a Map<String, Value>,
    errs: Vec<String>,
}

impl Reader<'_> {
    fn get(&mut self, key: &str, required: bool) -> Option<&Value> {
        match self.obj.get(key) {
            Some(v) => Some(v),
            None => {
                if required {
                    self.errs.push(format!("missing field \"{key}\""));
                }
                None
            }
        }
    }

    fn number(&mut self, key: &str, default: Option<f64>) -> f64 {
        match self.get(key, default.is_none()).cloned() {
            Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
            Some(other) => {
                self.errs
                    .push(format!("field \"{key}\" must be a number, got {other}"));
                f64::NAN
            }
            None => default.unwrap_or(f64::NAN),
        }
    }

    fn count(&mut self, key: &str, default: Option<u64>) -> u64 {
        match self.get(key, default.is_none()).cloned() {
            Some(Value::Number(n)) => match n.as_u64() {
                Some(v) => v,
                None => {
                    self.errs.push(format!(
                        "field \"{key}\" must be a nonnegative integer, got {n}"
                    ));
                    0
                }
            },
            Some(other) => {
                self.errs.push(format!(
                    "field \"{key}\" must be a nonnegative integer, got {other}"
                ));
                0
            }
            None => default.unwrap_or(0),
        }
    }

    fn text(&mut self, key: &str, default: Option<&str>) -> String {
        match self.get(key, default.is_none()).cloned() {
            Some(Value::String(s)) => s,
            Some(other) => {
                self.errs
                    .push(format!("field \"{key}\" must be a string, got {other}"));
                String::new()
            }
            None => default.unwrap_or_default().to_string(),
        }
    }

    fn pair(&mut self, key: &str, value: &Value) -> [f64; 2] {
        match value.as_array() {
            Some(a) if a.len() == 2 && a.iter().all(Value::is_number) => [
                a[0].as_f64().unwrap_or(f64::NAN),
                a[1].as_f64().unwrap_or(f64::NAN),
            ],
            _ => {
                self.errs.push(format!(
                    "field \"{key}\" must be an array of two numbers, got {value}"
                ));
                [f64::NAN; 2]
            }
        }
    }

    fn matrix(&mut self, key: &str) -> [[f64; 2]; 2] {
        let Some(v) = self.get(key, true).cloned() else {
            return [[f64::NAN; 2]; 2];
        };
        match v.as_array() {
            Some(rows) if rows.len() == 2 => [self.pair(key, &rows[0]), self.pair(key, &rows[1])],
            _ => {
                self.errs.push(format!(
                    "field \"{key}\" must be a 2x2 array of numbers, got {v}"
                ));
                [[f64::NAN; 2]; 2]
            }
        }
    }

    fn choice<T: Copy>(
        &mut self,
        key: &str,
        default: Option<&str>,
        options: &[(&str, T)],
    ) -> Option<T> {
        let s = self.text(key, default);
        if s.is_empty() && self.obj.get(key).is_none() && default.is_none() {
            return None;
        }
        let found = options.iter().find(|(name, _)| *name == s).map(|(_, v)| *v);
        if found.is_none() {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            self.errs
                .push(format!("field \"{key}\" = \"{s}\" is not one of {names:?}"));
        }
        found
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigErrors> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| ConfigErrors(vec![format!("invalid JSON: {e}")]))?;
        let Some(obj) = value.as_object() else {
            return Err(ConfigErrors(vec![
                "config must be a JSON object".to_string()
            ]));
        };
        let mut r = Reader {
            obj,
            errs: Vec::new(),
        };
        for key in obj.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                r.errs.push(format!("unknown field \"{key}\""));
            }
        }
        let hurst = r.number("hurst", None);
        let lambda = r.matrix("lambda");
        let k = r.matrix("k");
        let beta = r.number("beta", None);
        let beta_c = r.number("beta_c", None);
        let m_elements = r.count("M", None) as usize;
        let n_steps = r.count("N", None) as usize;
        let horizon = r.number("T", None);
        let bc = r.choice(
            "bc",
            Some("robin"),
            &[
                ("robin", BoundaryCondition::Robin),
                ("dirichlet", BoundaryCondition::Dirichlet),
            ],
        );
        let kind = r.choice("initial", None, &[("parabolic", 0u8), ("psi", 1u8)]);
        let coef = match r.get("initial_coef", true).cloned() {
            Some(v) => r.pair("initial_coef", &v),
            None => [f64::NAN; 2],
        };
        let eps_quench = r.number("eps_quench", Some(1e-3));
        let dependence = r.choice(
            "dependence",
            Some("independent"),
            &[
                ("independent", Dependence::Independent),
                ("volterra", Dependence::Volterra),
            ],
        );
        let fbm_method = r.choice(
            "fbm_method",
            Some("circulant"),
            &[
                ("circulant", FbmMethod::Circulant),
                ("cholesky", FbmMethod::Cholesky),
            ],
        );
        let tail = r.choice(
            "variant",
            Some("proof"),
            &[
                ("proof", TailVariant::Proof),
                ("statement", TailVariant::Statement),
            ],
        );
        let denominator = r.choice(
            "denominator",
            Some("display"),
            &[
                ("display", DenominatorVariant::Display),
                ("malliavin", DenominatorVariant::Malliavin),
            ],
        );
        let alpha = r.number("alpha", Some(0.5 * (hurst + 1.0)));
        let l1_paths = r.count("l1_paths", Some(200)) as usize;
        let l1_t_max = r.number("l1_t_max", Some(horizon));
        let horizons = match r.get("horizons", false).cloned() {
            Some(Value::Array(a)) if a.iter().all(Value::is_number) => {
                a.iter().filter_map(Value::as_f64).collect()
            }
            Some(other) => {
                r.errs.push(format!(
                    "field \"horizons\" must be an array of numbers, got {other}"
                ));
                Vec::new()
            }
            None => vec![horizon],
        };
        let n_paths = r.count("n_paths", Some(100)) as usize;
        let seed = r.count("seed", Some(0));
        let mut errs = r.errs;

        if !(alpha > hurst && alpha < 1.0) && hurst.is_finite() {
            errs.push(format!("alpha = {alpha} must lie in (hurst, 1)"));
        }
        if !(l1_t_max.is_finite() && l1_t_max > 0.0) {
            errs.push(format!("l1_t_max = {l1_t_max} must be positive"));
        }
        for &h in &horizons {
            if !(h > 0.0 && h <= horizon) {
                errs.push(format!("horizon {h} must lie in (0, T]"));
            }
        }
        let (
            Some(bc),
            Some(kind),
            Some(dependence),
            Some(fbm_method),
            Some(tail),
            Some(denominator),
        ) = (bc, kind, dependence, fbm_method, tail, denominator)
        else {
            return Err(ConfigErrors(errs));
        };
        let initial = if kind == 0 {
            InitialData::Parabolic(coef)
        } else {
            InitialData::Psi(coef)
        };
        let system = SystemConfig {
            hurst,
            lambda,
            k,
            beta,
            beta_c,
            bc,
            m_elements,
            n_steps,
            horizon,
            initial,
            eps_quench,
            dependence,
            fbm_method,
        };
        if errs.is_empty() {
            if let Err(ConfigErrors(more)) = system.validate() {
                errs.extend(more);
            }
        } else if let Err(ConfigErrors(more)) = system.validate() {
            // Skip messages about fields that already failed to parse.
            errs.extend(more.into_iter().filter(|m| !m.contains("NaN")));
        }
        if !errs.is_empty() {
            return Err(ConfigErrors(errs));
        }
        Ok(Self {
            system,
            variants: BoundVariants { tail, denominator },
            alpha,
            l1_paths,
            l1_t_max,
            horizons,
            n_paths,
            seed,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_json_str(&text)
    }
}
