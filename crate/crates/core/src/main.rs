use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ucl_bandit::cli::{self, ExperimentConfig, Preset};
use ucl_bandit::Error;

#[derive(Parser)]
#[command(name = "ucl-bandit", version, about = "Bayesian UCL policies for Gaussian bandits")]
struct Cli {
    /// Worker threads for ensembles (default: all processors).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; omitted blocks take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the prior block with a stock scenario.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ensemble and write the mean regret curve.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write an SVG plot of the regret curve.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Evaluate the regret bound for the configured prior.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate and compare suboptimal selections against the bound.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Check the Gaussian tail and difference-of-squares inequalities.
    Check {
        /// Grid points per inequality.
        #[arg(long, default_value_t = 10_000)]
        resolution: usize,
        /// Random tuples for the difference-of-squares check.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(preset) = common.preset {
        config.apply_preset(preset);
    }
    Ok(config)
}

fn run(command: Command) -> Result<i32, Error> {
    match command {
        Command::Simulate { common, plot } => {
            let ensemble = cli::cmd_simulate(&load(&common)?, &common.out, plot.as_deref())?;
            eprintln!(
                "final mean cumulative regret {:.3} (sem {:.3}) over {} runs",
                ensemble.final_mean(),
                ensemble.final_sem(),
                ensemble.runs
            );
            for v in ensemble.violations.iter().take(10) {
                eprintln!("run {}: {}", v.run, v.violation);
            }
            Ok(cli::EXIT_OK)
        }
        Command::Bounds { common } => {
            let report = cli::cmd_bounds(&load(&common)?, &common.out)?;
            eprintln!("regret bound at T = {}: {:.3}", report.horizon, report.regret_bound());
            Ok(cli::EXIT_OK)
        }
        Command::Verify { common } => {
            let outcome = cli::cmd_verify(&load(&common)?, &common.out)?;
            for r in &outcome.rows {
                eprintln!(
                    "arm {}: mean n_i {:.3} ± {:.3}, bound {:.3} -> {}",
                    r.arm,
                    r.empirical,
                    r.sem,
                    r.bound,
                    if r.satisfied { "ok" } else { "VIOLATED" }
                );
            }
            Ok(if outcome.passed() { cli::EXIT_OK } else { cli::EXIT_VERIFY })
        }
        Command::Check {
            resolution,
            samples,
            seed,
        } => {
            let outcome = cli::cmd_check(resolution, samples, seed)?;
            print!("{}{}", outcome.lemma1, outcome.lemma2);
            Ok(if outcome.passed() { cli::EXIT_OK } else { cli::EXIT_VERIFY })
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_RUNTIME as u8);
        }
    }
    match run(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
