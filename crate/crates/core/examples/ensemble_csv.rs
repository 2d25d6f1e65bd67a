//! Seeded parallel ensemble written as the regret CSV.
//!
//!     cargo run --release --example ensemble_csv -- regret.csv

use ucl_bandit::bounds::lai_robbins_lower_bound;
use ucl_bandit::cli::output::regret_csv;
use ucl_bandit::cli::ExperimentConfig;
use ucl_bandit::sim::run_ensemble;

fn main() -> ucl_bandit::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "regret.csv".into());
    let mut config = ExperimentConfig::default();
    config.run.runs = 20;
    config.run.horizon = 1000;
    let experiment = config.experiment()?;
    let ensemble = run_ensemble(&experiment)?;
    let lb = lai_robbins_lower_bound(&experiment.instance, experiment.horizon)?.curve(experiment.horizon);
    std::fs::write(&out, regret_csv(&ensemble, &lb))?;
    println!(
        "{} runs (seeds {}..={}), final regret {:.1} ± {:.1}, wrote {out}",
        ensemble.runs,
        ensemble.seeds[0],
        ensemble.seeds[ensemble.runs - 1],
        ensemble.final_mean(),
        ensemble.final_sem()
    );
    Ok(())
}
