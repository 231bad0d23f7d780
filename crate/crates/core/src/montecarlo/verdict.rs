use super::ensemble::{empirical_quench_prob, EnsembleSummary, SENSITIVITY_EPS};
use super::stats::{wilson_interval, Proportion};
use super::theory::TheoryReport;
use super::MonteCarloError;
use serde::Serialize;

/// Largest share of quenched paths allowed outside `[τ*, τ^*]`.
pub const ORDERING_ALLOWANCE: f64 = 0.02;
/// Required quench share at the longest horizon when quenching is almost sure.
pub const ALMOST_SURE_LEVEL: f64 = 0.95;

/// Comparison of one bound against the ensemble. `satisfied` is `None` for
/// informational rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub horizon: f64,
    pub bound: Option<f64>,
    pub empirical: Proportion,
    /// Share of paths whose upper quenching-time bound fired by the horizon.
    pub upper_fired: Option<Proportion>,
    pub satisfied: Option<bool>,
    pub note: String,
}

/// One verdict per applicable bound, plus the quench-threshold sensitivity.
/// `horizons` are the times for the almost-sure trend; each must lie within
/// the ensemble horizon.
pub fn check_theorem_consistency(
    summary: &EnsembleSummary,
    theory: &TheoryReport,
    horizons: &[f64],
) -> Result<Vec<Verdict>, MonteCarloError> {
    if summary.dependence != theory.dependence {
        return Err(MonteCarloError::DependenceMismatch);
    }
    let t = theory.horizon;
    let p = empirical_quench_prob(summary, t)?;
    let fired = summary
        .records
        .iter()
        .any(|r| r.upper_defined)
        .then(|| summary.upper_fired(t));
    let mut out = Vec::new();

    for (name, bound) in [
        ("upper_tail_malliavin", theory.upper_malliavin),
        ("upper_tail_markov", theory.upper_markov),
    ] {
        if let Some(b) = bound {
            let note = if b.vacuous {
                "vacuous"
            } else if b.clipped {
                "clipped"
            } else {
                ""
            };
            out.push(Verdict {
                name: name.into(),
                horizon: t,
                bound: Some(b.value),
                empirical: p,
                upper_fired: fired,
                satisfied: Some(p.low <= b.value),
                note: note.into(),
            });
        }
    }

    if let Some(b) = theory.lower {
        out.push(Verdict {
            name: "lower_finite_time".into(),
            horizon: t,
            bound: Some(b.value),
            empirical: p,
            upper_fired: fired,
            satisfied: Some(b.value <= p.high),
            note: "p_hat(T) is a lower proxy for the probability of quenching at any time".into(),
        });
    }

    if theory.almost_sure_applicable && !horizons.is_empty() {
        let mut hs = horizons.to_vec();
        hs.sort_by(f64::total_cmp);
        let ps = hs
            .iter()
            .map(|&h| empirical_quench_prob(summary, h))
            .collect::<Result<Vec<_>, _>>()?;
        let monotone = ps.windows(2).all(|w| w[1].estimate >= w[0].estimate);
        let last = *ps.last().expect("nonempty");
        let trend: Vec<String> = hs
            .iter()
            .zip(&ps)
            .map(|(h, p)| format!("{h}:{}", p.estimate))
            .collect();
        out.push(Verdict {
            name: "almost_sure".into(),
            horizon: *hs.last().expect("nonempty"),
            bound: Some(ALMOST_SURE_LEVEL),
            empirical: last,
            upper_fired: None,
            satisfied: Some(monotone && last.estimate >= ALMOST_SURE_LEVEL),
            note: trend.join(" "),
        });
    }

    if summary.records.iter().any(|r| r.upper_defined) {
        let share = wilson_interval(summary.ordering_violations, summary.n_quenched);
        out.push(Verdict {
            name: "estimation_interval".into(),
            horizon: summary.horizon,
            bound: Some(ORDERING_ALLOWANCE),
            empirical: share,
            upper_fired: None,
            satisfied: Some(
                summary.ordering_violations as f64
                    <= ORDERING_ALLOWANCE * summary.n_quenched as f64,
            ),
            note: format!("upper_misses={}", summary.upper_misses),
        });
    }

    for (j, eps) in SENSITIVITY_EPS.iter().enumerate() {
        if *eps < summary.eps_quench {
            continue;
        }
        let k = summary
            .records
            .iter()
            .filter(|r| r.aborted.is_none() && r.tau_eps[j].is_some_and(|q| q <= t))
            .count();
        out.push(Verdict {
            name: format!("quench_share_eps_{eps:e}"),
            horizon: t,
            bound: None,
            empirical: wilson_interval(k, summary.n_valid()),
            upper_fired: None,
            satisfied: None,
            note: String::new(),
        });
    }
    Ok(out)
}
