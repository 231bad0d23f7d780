use super::stats::{wilson_interval, Proportion};
use super::MonteCarloError;
use crate::bounds::BoundContext;
use crate::config::SystemConfig;
use crate::fem::{QuenchComponent, Simulator};
use crate::noise::{Dependence, PathSeed};
use rayon::prelude::*;
use serde::Serialize;

/// Quench thresholds at which the first crossing is also reported.
pub const SENSITIVITY_EPS: [f64; 2] = [1e-2, 1e-3];

/// Outcome of one realisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub path_id: u64,
    /// Numerical quench time, the first step with `max u ≥ 1 - eps_quench`.
    pub tau_num: Option<f64>,
    pub component: Option<QuenchComponent>,
    /// Per-component projected crossing times, see
    /// [`crate::fem::QuenchEvent::crossing`].
    pub crossing: [Option<f64>; 2],
    /// First crossing of `min z ≤ eps` for each of [`SENSITIVITY_EPS`];
    /// `None` also when `eps` is below the run's quench threshold.
    pub tau_eps: [Option<f64>; 2],
    /// Pathwise bounds were evaluated (Robin data with `β_c = β`).
    pub bounded: bool,
    pub tau_star: Option<f64>,
    pub tau_upper: Option<f64>,
    pub upper_defined: bool,
    pub tau_double_star: Option<f64>,
    pub saturated: bool,
    pub fallback: bool,
    pub aborted: Option<String>,
}

impl PathRecord {
    /// Quenched, but outside `[τ*, τ^*]` by more than `slack`. A lower bound
    /// that is never reached within the horizon counts as `τ* > T ≥ τ_q`.
    pub fn ordering_violation(&self, slack: f64) -> bool {
        let Some(tq) = self.tau_num.filter(|_| self.bounded) else {
            return false;
        };
        let below = match self.tau_star {
            Some(lo) => tq < lo - slack,
            None => true,
        };
        let above = self.tau_upper.is_some_and(|hi| tq > hi + slack);
        below || above
    }

    /// `τ^*` fired more than `slack` before the horizon but the path never
    /// quenched.
    pub fn upper_miss(&self, horizon: f64, slack: f64) -> bool {
        self.tau_num.is_none()
            && self.aborted.is_none()
            && self.tau_upper.is_some_and(|hi| hi + slack < horizon)
    }

    pub fn flags(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if self.aborted.is_some() {
            f.push("aborted");
        }
        if self.tau_num.is_none() {
            f.push("censored");
        }
        if !self.bounded {
            f.push("unbounded");
        } else if !self.upper_defined {
            f.push("upper_undefined");
        }
        if self.saturated {
            f.push("saturated");
        }
        if self.fallback {
            f.push("fbm_fallback");
        }
        f
    }
}

/// Aggregate of an ensemble, rebuilt from its records so that merging is
/// concatenation followed by a sort on `path_id`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub horizon: f64,
    pub dt: f64,
    pub eps_quench: f64,
    pub dependence: Dependence,
    pub records: Vec<PathRecord>,
    pub n_aborted: usize,
    pub n_quenched: usize,
    /// Sorted numerical quench times of non-aborted paths.
    pub quench_times: Vec<f64>,
    /// Quenched paths outside `[τ*, τ^*]` by more than one step.
    pub ordering_violations: usize,
    /// Non-quenched paths whose `τ^*` fired more than one step before `T`.
    pub upper_misses: usize,
}

impl EnsembleSummary {
    pub fn from_records(config: &SystemConfig, mut records: Vec<PathRecord>) -> Self {
        records.sort_by_key(|r| r.path_id);
        let dt = config.dt();
        let valid = || records.iter().filter(|r| r.aborted.is_none());
        let mut quench_times: Vec<f64> = valid().filter_map(|r| r.tau_num).collect();
        quench_times.sort_by(f64::total_cmp);
        Self {
            horizon: config.horizon,
            dt,
            eps_quench: config.eps_quench,
            dependence: config.dependence,
            n_aborted: records.len() - valid().count(),
            n_quenched: quench_times.len(),
            quench_times,
            ordering_violations: valid().filter(|r| r.ordering_violation(dt)).count(),
            upper_misses: valid().filter(|r| r.upper_miss(config.horizon, dt)).count(),
            records,
        }
    }

    /// Union of two ensembles of the same configuration.
    pub fn merge(&self, other: &Self, config: &SystemConfig) -> Self {
        let mut all = self.records.clone();
        all.extend(other.records.iter().cloned());
        Self::from_records(config, all)
    }

    pub fn n_paths(&self) -> usize {
        self.records.len()
    }

    /// Paths that count towards probabilities.
    pub fn n_valid(&self) -> usize {
        self.records.len() - self.n_aborted
    }

    /// Empirical CDF of the numerical quench time.
    pub fn empirical_cdf(&self, t: f64) -> f64 {
        if self.n_valid() == 0 {
            return 0.0;
        }
        self.quench_times.partition_point(|&q| q <= t) as f64 / self.n_valid() as f64
    }

    /// Share of valid paths whose upper quenching-time bound fired by `t`.
    pub fn upper_fired(&self, t: f64) -> Proportion {
        let k = self
            .records
            .iter()
            .filter(|r| r.aborted.is_none() && r.tau_upper.is_some_and(|u| u <= t))
            .count();
        wilson_interval(k, self.n_valid())
    }
}

/// `p̂(T) = #{τ_num ≤ T} / n` over non-aborted paths, with its Wilson
/// interval. `T` beyond the simulated horizon is an error.
pub fn empirical_quench_prob(
    summary: &EnsembleSummary,
    t: f64,
) -> Result<Proportion, MonteCarloError> {
    if t > summary.horizon * (1.0 + 1e-12) {
        return Err(MonteCarloError::BeyondHorizon {
            t,
            horizon: summary.horizon,
        });
    }
    let k = summary.quench_times.partition_point(|&q| q <= t);
    Ok(wilson_interval(k, summary.n_valid()))
}

/// Worker count from `QUENCH_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("QUENCH_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Simulation plus bound evaluation for every path index in `ids`.
pub fn run_paths(
    config: &SystemConfig,
    seed: u64,
    ids: std::ops::Range<u64>,
) -> Result<Vec<PathRecord>, MonteCarloError> {
    let sim = Simulator::new(config)?;
    let ctx = if config.bounds_apply() {
        Some(BoundContext::new(config)?)
    } else {
        None
    };
    let eps_q = config.eps_quench;
    Ok(ids
        .into_par_iter()
        .map(|id| {
            let (path, noise, traj) = sim.run_path(PathSeed::new(seed, id), None);
            let report = ctx.as_ref().map(|c| c.evaluate(&noise));
            let tau_eps = SENSITIVITY_EPS.map(|e| {
                if e >= eps_q {
                    traj.first_crossing(e)
                } else {
                    None
                }
            });
            PathRecord {
                path_id: id,
                tau_num: traj.quench_time(),
                component: traj.quench.as_ref().map(|q| q.component),
                crossing: traj.quench.as_ref().map_or([None; 2], |q| q.crossing),
                tau_eps,
                bounded: report.is_some(),
                tau_star: report.as_ref().and_then(|r| r.tau_star),
                tau_upper: report.as_ref().and_then(|r| r.tau_upper),
                upper_defined: report.as_ref().is_some_and(|r| r.upper_defined),
                tau_double_star: report.as_ref().and_then(|r| r.tau_double_star),
                saturated: report.as_ref().is_some_and(|r| r.saturated),
                fallback: path.fallback,
                aborted: traj.aborted,
            }
        })
        .collect())
}

/// Runs paths `0..n_paths` of `seed` on `threads` workers (default: the
/// `QUENCH_THREADS` variable, then the hardware). The result does not depend
/// on the worker count.
pub fn run_ensemble(
    config: &SystemConfig,
    n_paths: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<EnsembleSummary, MonteCarloError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(threads_from_env) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| MonteCarloError::ThreadPool(e.to_string()))?;
    let records = pool.install(|| run_paths(config, seed, 0..n_paths as u64))?;
    Ok(EnsembleSummary::from_records(config, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundContext;
    use crate::config::{BoundaryCondition, InitialData};
    use crate::fem::simulate;
    use crate::noise::FbmMethod;

    fn config(k: f64) -> SystemConfig {
        SystemConfig {
            hurst: 0.6,
            lambda: [[1.0; 2]; 2],
            k: [[k; 2]; 2],
            beta: 1.0,
            beta_c: 1.0,
            bc: BoundaryCondition::Robin,
            m_elements: 20,
            n_steps: 400,
            horizon: 0.1,
            initial: InitialData::Psi([0.5, 0.5]),
            eps_quench: 1e-3,
            dependence: Dependence::Independent,
            fbm_method: FbmMethod::Circulant,
        }
    }

    #[test]
    fn singleton_matches_simulate_and_bounds() {
        let cfg = config(0.05);
        let s = run_ensemble(&cfg, 1, 42, Some(1)).unwrap();
        let traj = simulate(&cfg, 42).unwrap();
        let sim = Simulator::new(&cfg).unwrap();
        let (_, noise) = sim.noise(PathSeed::new(42, 0));
        let rep = BoundContext::new(&cfg).unwrap().evaluate(&noise);
        let r = &s.records[0];
        assert_eq!(r.tau_num, traj.quench_time());
        assert_eq!(
            (r.tau_star, r.tau_upper, r.tau_double_star),
            (rep.tau_star, rep.tau_upper, rep.tau_double_star)
        );
    }

    #[test]
    fn worker_count_does_not_matter() {
        let cfg = config(0.05);
        let a = run_ensemble(&cfg, 12, 3, Some(1)).unwrap();
        let b = run_ensemble(&cfg, 12, 3, Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_paths_agree() {
        let cfg = config(0.0);
        let s = run_ensemble(&cfg, 5, 8, None).unwrap();
        assert!(s
            .records
            .windows(2)
            .all(|w| w[0].tau_num == w[1].tau_num && w[0].tau_star == w[1].tau_star));
        let p = empirical_quench_prob(&s, cfg.horizon).unwrap().estimate;
        assert!(p == 0.0 || p == 1.0);
    }

    #[test]
    fn merging_halves_gives_whole() {
        let cfg = config(0.05);
        let whole = EnsembleSummary::from_records(&cfg, run_paths(&cfg, 1, 0..10).unwrap());
        let a = EnsembleSummary::from_records(&cfg, run_paths(&cfg, 1, 0..4).unwrap());
        let b = EnsembleSummary::from_records(&cfg, run_paths(&cfg, 1, 4..7).unwrap());
        let c = EnsembleSummary::from_records(&cfg, run_paths(&cfg, 1, 7..10).unwrap());
        assert_eq!(a.merge(&b, &cfg).merge(&c, &cfg), whole);
        assert_eq!(a.merge(&b.merge(&c, &cfg), &cfg), whole);
        assert_eq!(c.merge(&a, &cfg).merge(&b, &cfg), whole);
    }

    #[test]
    fn quench_probability_respects_horizon() {
        let cfg = config(0.05);
        let s = run_ensemble(&cfg, 4, 0, None).unwrap();
        assert!(empirical_quench_prob(&s, 2.0 * cfg.horizon).is_err());
        assert!(s.quench_times.iter().all(|&t| t <= cfg.horizon));
        assert!(s.ordering_violations <= s.n_quenched);
        assert_eq!(
            s.empirical_cdf(cfg.horizon),
            empirical_quench_prob(&s, cfg.horizon).unwrap().estimate
        );
    }
}
