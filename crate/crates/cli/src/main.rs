use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onebit_hankel::experiment::{
    emit_monte_carlo, emit_outputs, emit_rank_check, emit_theorem, load_file, run_experiment,
    run_monte_carlo, run_rank_check, ExperimentConfig,
};
use onebit_hankel::theory::{validate_theorem, TheoremConfig};
use onebit_hankel::Error;

/// Sidelobe gain, in dB, counted as a success in Monte Carlo summaries.
const MIN_SIDELOBE_GAIN_DB: f64 = 6.0;

#[derive(Parser)]
#[command(
    name = "onebit-radar",
    version,
    about = "One-bit sparse-array radar reconstruction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one reconstruction and write spectra, residuals and report.json.
    Run(Common),
    /// Repeat the reconstruction over `trials` seeds and aggregate.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Overrides the trial count from the config.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Monte Carlo check of the recovery error bound on synthetic matrices.
    ValidateTheory(Common),
    /// Singular values of the noiseless Hankel matrix for the configured scene.
    RankCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON or TOML config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn experiment_config(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| Failure::Config(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn theorem_config(c: &Common) -> Result<TheoremConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => load_file::<TheoremConfig>(p).map_err(|e| Failure::Config(e.to_string()))?,
        None => TheoremConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn written(files: &[PathBuf]) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run(c) => {
            let cfg = experiment_config(&c)?;
            let report = run_experiment(&cfg)?;
            let t = report.timings;
            eprintln!(
                "seed {}: {} iterations ({:?}), completed peaks within tolerance: {}, sidelobe gain {:.2} dB, {:.2} s",
                report.seed,
                report.solver.iterations,
                report.solver.stop,
                report.detection.completed.within_tolerance,
                report.detection.sidelobe_gain_db,
                t.total
            );
            written(&emit_outputs(&report, &c.out)?.files);
        }
        Command::Montecarlo { common: c, trials } => {
            let cfg = experiment_config(&c)?;
            let trials = trials.unwrap_or(cfg.trials);
            let report = run_monte_carlo(&cfg, trials, MIN_SIDELOBE_GAIN_DB)?;
            eprintln!(
                "{} trials, {} failed, detection rate {:.3}, sidelobe gain >= {} dB in {:.3}",
                report.trials,
                report.failed_trials,
                report.detection_rate,
                MIN_SIDELOBE_GAIN_DB,
                report.sidelobe_gain_rate
            );
            written(&emit_monte_carlo(&report, &c.out)?.files);
        }
        Command::ValidateTheory(c) => {
            let cfg = theorem_config(&c)?;
            let report = validate_theorem(&cfg)?;
            eprintln!(
                "m' = {}, bound {:.4}, within bound {:.3}, consistent trials {}/{}, violations {} (allowed {})",
                report.m_prime,
                report.bound,
                report.fraction_within_bound,
                report.consistent_trials,
                report.trials.len(),
                report.violations_consistent,
                report.allowed_violations
            );
            written(&emit_theorem(&report, &c.out)?.files);
        }
        Command::RankCheck(c) => {
            let cfg = experiment_config(&c)?;
            let report = run_rank_check(&cfg)?;
            eprintln!(
                "rank {} for {} targets, tail ratio {:.3e}",
                report.rank.rank, report.targets, report.tail_ratio
            );
            written(&emit_rank_check(&report, &c.out)?.files);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
