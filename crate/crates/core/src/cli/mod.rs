//! Experiment configuration and the `simulate`, `bounds`, `verify` and
//! `check` commands.
//!
//! Commands write their tables to a path and return the computed values, so
//! the binary only parses flags and maps errors to exit codes.

pub mod config;
pub mod output;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{ExperimentConfig, Preset, PriorMean};

use crate::bounds::{check_lemma1, check_lemma2, theorem1_bound, theorem2_bound, BoundReport, LemmaReport};
use crate::error::{Error, Result};
use crate::policy::Variant;
use crate::sim::{run_ensemble, verify_bounds, BoundCheck, EnsembleResult};
use output::Series;

/// Success, or every check passed.
pub const EXIT_OK: i32 = 0;
/// Bad configuration or parameters.
pub const EXIT_CONFIG: i32 = 1;
/// Numeric or I/O failure while running.
pub const EXIT_RUNTIME: i32 = 2;
/// A bound or lemma check failed.
pub const EXIT_VERIFY: i32 = 3;

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric(_) | Error::Io(_) => EXIT_RUNTIME,
        _ => EXIT_CONFIG,
    }
}

/// Runs the ensemble and writes the mean regret curve with its standard
/// error and the Lai-Robbins curve; optionally plots both.
pub fn cmd_simulate(config: &ExperimentConfig, out: &Path, plot: Option<&Path>) -> Result<EnsembleResult> {
    let experiment = config.experiment()?;
    let ensemble = run_ensemble(&experiment)?;
    let lb = crate::bounds::lai_robbins_lower_bound(&experiment.instance, experiment.horizon)?
        .curve(experiment.horizon);
    output::write(out, &output::regret_csv(&ensemble, &lb))?;
    if let Some(plot) = plot {
        let name = format!("{} prior", config.prior.variant);
        let svg = output::line_chart(
            &format!("Mean cumulative regret, {} runs", ensemble.runs),
            &[
                Series {
                    name: &name,
                    values: &ensemble.mean_cumulative_regret,
                },
                Series {
                    name: "Lai-Robbins",
                    values: &lb,
                },
            ],
        );
        output::write(plot, &svg)?;
    }
    Ok(ensemble)
}

/// Evaluates the bound matching the prior variant.
pub fn bound_report(config: &ExperimentConfig) -> Result<BoundReport> {
    let instance = config.instance()?;
    let prior = config.prior()?;
    let params = config.bound_params()?;
    match config.prior.variant {
        Variant::Correlated => theorem2_bound(&instance, &prior, &params, config.policy.nu, config.run.horizon),
        _ => theorem1_bound(&instance, &prior, &params, config.run.horizon),
    }
}

pub fn cmd_bounds(config: &ExperimentConfig, out: &Path) -> Result<BoundReport> {
    let report = bound_report(config)?;
    output::write(out, &output::bounds_csv(&report))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub report: BoundReport,
    pub rows: Vec<BoundCheck>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }
}

/// Simulates the policy with the bound's `a` and compares suboptimal
/// selection counts with the bound.
pub fn cmd_verify(config: &ExperimentConfig, out: &Path) -> Result<VerifyOutcome> {
    let report = bound_report(config)?;
    let mut experiment = config.experiment()?;
    experiment.params.a = config.bound.a;
    let ensemble = run_ensemble(&experiment)?;
    let rows = verify_bounds(&ensemble, &report)?;
    output::write(out, &output::verify_csv(&rows))?;
    Ok(VerifyOutcome { report, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub lemma1: LemmaReport,
    pub lemma2: LemmaReport,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.lemma1.passed() && self.lemma2.passed()
    }
}

/// Lemma 1 on grids of `resolution` points and Lemma 2 on `samples` random
/// tuples drawn from `seed`.
pub fn cmd_check(resolution: usize, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let lemma1 = check_lemma1(resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lemma2 = check_lemma2(samples, &mut rng);
    Ok(CheckOutcome { lemma1, lemma2 })
}
