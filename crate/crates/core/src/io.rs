//! CSV and manifest writers shared by the command-line tool and the tests.

use crate::config::RunConfig;
use crate::montecarlo::{EnsembleSummary, Verdict};
use serde::Serialize;
use std::io::{self, Write};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

fn field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

/// `path_id,tau_num,tau_star,tau_upper,tau_double_star,flags`; empty cells
/// mean the time was not reached within the horizon.
pub fn write_quench_times<W: Write>(summary: &EnsembleSummary, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "path_id,tau_num,tau_star,tau_upper,tau_double_star,flags"
    )?;
    for r in &summary.records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.path_id,
            opt(r.tau_num),
            opt(r.tau_star),
            opt(r.tau_upper),
            opt(r.tau_double_star),
            r.flags().join(";")
        )?;
    }
    Ok(())
}

/// `verdict,horizon,bound,p_hat,ci_low,ci_high,successes,trials,p_upper_fired,satisfied,note`.
pub fn write_summary<W: Write>(verdicts: &[Verdict], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "verdict,horizon,bound,p_hat,ci_low,ci_high,successes,trials,p_upper_fired,satisfied,note"
    )?;
    for v in verdicts {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            v.name,
            num(v.horizon),
            opt(v.bound),
            num(v.empirical.estimate),
            num(v.empirical.low),
            num(v.empirical.high),
            v.empirical.successes,
            v.empirical.trials,
            opt(v.upper_fired.map(|p| p.estimate)),
            opt_bool(v.satisfied),
            field(&v.note)
        )?;
    }
    Ok(())
}

/// Per-path `(τ*, τ_num, τ^*)` rows followed by one row per verdict.
/// An empty ensemble writes only the header.
pub fn write_compare<W: Write>(
    summary: &EnsembleSummary,
    verdicts: &[Verdict],
    mut out: W,
) -> io::Result<()> {
    writeln!(
        out,
        "row,path_id,tau_star,tau_num,tau_upper,verdict,bound,p_hat,satisfied"
    )?;
    if summary.records.is_empty() {
        return Ok(());
    }
    for r in &summary.records {
        writeln!(
            out,
            "path,{},{},{},{},,,,",
            r.path_id,
            opt(r.tau_star),
            opt(r.tau_num),
            opt(r.tau_upper)
        )?;
    }
    for v in verdicts {
        writeln!(
            out,
            "verdict,,,,,{},{},{},{}",
            v.name,
            opt(v.bound),
            num(v.empirical.estimate),
            opt_bool(v.satisfied)
        )?;
    }
    Ok(())
}

/// `quantity,value,flags`.
pub fn write_quantities<W: Write>(rows: &[(String, f64, String)], mut out: W) -> io::Result<()> {
    writeln!(out, "quantity,value,flags")?;
    for (q, v, f) in rows {
        writeln!(out, "{},{},{}", q, num(*v), field(f))?;
    }
    Ok(())
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub config: Option<&'a RunConfig>,
    pub extra: serde_json::Value,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str) -> Self {
        Self {
            tool: "quench",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            n_paths: None,
            config: None,
            extra: serde_json::Value::Null,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }
}
