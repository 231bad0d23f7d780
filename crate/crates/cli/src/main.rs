use clap::{Parser, Subcommand, ValueEnum};
use quench::config::{RunConfig, TailVariant};
use quench::fem::Simulator;
use quench::io::{write_compare, write_quantities, write_quench_times, write_summary, Manifest};
use quench::montecarlo::{
    check_theorem_consistency, run_ensemble, EnsembleSummary, TheoryReport, Verdict,
};
use quench::noise::{write_noise_csv, PathSeed};
use quench::spectral::solve_robin_eigenpair;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "quench",
    version,
    about = "Stochastic MEMS quenching simulator and bound checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Proof,
    Statement,
}

#[derive(Subcommand)]
enum Command {
    /// Principal Robin eigenpair on (0, 1).
    Eigen {
        #[arg(long)]
        beta: f64,
    },
    /// One realisation of the scheme.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Dump the full field every k-th step.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        dump_every: Option<u64>,
    },
    /// Many realisations with per-path bounds and bound verdicts.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Path-independent bounds at horizon T, as CSV on stdout.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "T")]
        t: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
    },
    /// Per-path bound interval against the numerical quench time.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_path(path).map_err(|e| Failure::Config(e.to_string()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn numerical<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Numerical(e.to_string())
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<(), Failure> {
    let mut f = create(dir, "manifest.json")?;
    m.write(&mut f)?;
    f.flush()?;
    Ok(())
}

fn ensemble_with_verdicts(
    run: &RunConfig,
    n: u32,
    seed: u64,
) -> Result<(EnsembleSummary, Vec<Verdict>), Failure> {
    let summary = run_ensemble(&run.system, n as usize, seed, None).map_err(numerical)?;
    if n == 0 {
        return Ok((summary, Vec::new()));
    }
    let theory = TheoryReport::evaluate(run, run.system.horizon, None).map_err(numerical)?;
    let verdicts =
        check_theorem_consistency(&summary, &theory, &run.horizons).map_err(numerical)?;
    Ok((summary, verdicts))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Eigen { beta } => {
            let pair =
                solve_robin_eigenpair(beta, 1e-14).map_err(|e| Failure::Config(e.to_string()))?;
            let mut out = io::stdout().lock();
            writeln!(out, "chi,psi_min,psi_max,normalization_residual")?;
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                pair.chi,
                pair.psi_min(),
                pair.psi_max(),
                pair.normalization_residual()
            )?;
        }
        Command::Simulate {
            config,
            seed,
            out,
            dump_every,
        } => {
            let run = load(&config)?;
            let sim = Simulator::new(&run.system).map_err(|e| Failure::Config(e.to_string()))?;
            let (path, mixed, traj) =
                sim.run_path(PathSeed::new(seed, 0), dump_every.map(|k| k as usize));
            let mut f = create(&out, "trajectory.csv")?;
            traj.write_csv(&mut f)?;
            f.flush()?;
            let mut f = create(&out, "noise.csv")?;
            write_noise_csv(&path, &mixed, &mut f)?;
            f.flush()?;
            if dump_every.is_some() {
                let mut f = create(&out, "fields.csv")?;
                traj.write_fields_csv(&mut f)?;
                f.flush()?;
            }
            let mut m = Manifest::new("simulate");
            m.seed = Some(seed);
            m.config = Some(&run);
            m.extra = serde_json::json!({
                "quench_time": traj.quench_time(),
                "quench_component": traj.quench.as_ref().map(|q| q.component.as_str()),
                "aborted": traj.aborted,
                "fbm_fallback": path.fallback,
            });
            write_manifest(&out, &m)?;
            if let Some(reason) = traj.aborted {
                return Err(Failure::Numerical(reason));
            }
        }
        Command::Ensemble {
            config,
            n,
            seed,
            out,
        } => {
            let run = load(&config)?;
            let (summary, verdicts) = ensemble_with_verdicts(&run, n, seed)?;
            let mut f = create(&out, "quench_times.csv")?;
            write_quench_times(&summary, &mut f)?;
            f.flush()?;
            let mut f = create(&out, "summary.csv")?;
            write_summary(&verdicts, &mut f)?;
            f.flush()?;
            let mut m = Manifest::new("ensemble");
            m.seed = Some(seed);
            m.n_paths = Some(n as usize);
            m.config = Some(&run);
            m.extra = serde_json::json!({ "aborted_paths": summary.n_aborted });
            write_manifest(&out, &m)?;
        }
        Command::Bounds {
            config,
            t,
            alpha,
            variant,
        } => {
            let mut run = load(&config)?;
            if let Some(v) = variant {
                run.variants.tail = match v {
                    Variant::Proof => TailVariant::Proof,
                    Variant::Statement => TailVariant::Statement,
                };
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::Config(format!("--T must be positive, got {t}")));
            }
            let theory = TheoryReport::evaluate(&run, t, alpha).map_err(|e| match e {
                quench::montecarlo::MonteCarloError::Bounds(
                    quench::bounds::BoundsError::AlphaOutOfRange { .. },
                ) => Failure::Config(e.to_string()),
                e => numerical(e),
            })?;
            let mut rows = theory.rows();
            for note in &theory.notes {
                rows.push(("note".into(), f64::NAN, note.clone()));
            }
            let mut out = io::stdout().lock();
            write_quantities(&rows, &mut out)?;
        }
        Command::Compare {
            config,
            n,
            seed,
            out,
        } => {
            let run = load(&config)?;
            let (summary, verdicts) = ensemble_with_verdicts(&run, n, seed)?;
            let mut f = create(&out, "compare.csv")?;
            write_compare(&summary, &verdicts, &mut f)?;
            f.flush()?;
            let mut m = Manifest::new("compare");
            m.seed = Some(seed);
            m.n_paths = Some(n as usize);
            m.config = Some(&run);
            write_manifest(&out, &m)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error:\n{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical abort: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(1)
        }
    }
}
