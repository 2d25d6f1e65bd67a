//! Well- and ill-informed priors against the flat prior on the default
//! surface, with an SVG of the mean regret curves.
//!
//!     cargo run --release --example prior_quality -- 100 priors.svg

use ucl_bandit::cli::output::{line_chart, Series};
use ucl_bandit::cli::{ExperimentConfig, Preset};
use ucl_bandit::policy::Variant;
use ucl_bandit::sim::{run_ensemble, EnsembleResult};

fn run(preset: Preset, variant: Variant, runs: usize) -> ucl_bandit::Result<EnsembleResult> {
    let mut config = ExperimentConfig::default();
    config.run.runs = runs;
    config.prior.variant = variant;
    config.apply_preset(preset);
    run_ensemble(&config.experiment()?)
}

fn main() -> ucl_bandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(20, |s| s.parse().expect("run count"));
    let svg = args.next().unwrap_or_else(|| "priors.svg".into());

    let flat = run(Preset::Uninformative, Variant::Uninformative, runs)?;
    let cases = [
        ("well-informed correlated", Preset::WellInformed, Variant::Correlated),
        ("well-informed uncorrelated", Preset::WellInformed, Variant::Uncorrelated),
        ("ill-informed correlated", Preset::IllInformed, Variant::Correlated),
        ("ill-informed uncorrelated", Preset::IllInformed, Variant::Uncorrelated),
    ];
    let mut results = Vec::new();
    for (name, preset, variant) in cases {
        results.push((name, run(preset, variant, runs)?));
    }
    println!("{:<28} {:>10} {:>8}", "prior", "regret", "sem");
    println!("{:<28} {:>10.1} {:>8.1}", "uninformative", flat.final_mean(), flat.final_sem());
    for (name, e) in &results {
        println!("{name:<28} {:>10.1} {:>8.1}", e.final_mean(), e.final_sem());
    }

    // the ill-informed uncorrelated curve dwarfs the rest; plot it separately
    let mut series = vec![Series {
        name: "uninformative",
        values: &flat.mean_cumulative_regret,
    }];
    series.extend(results.iter().take(3).map(|(name, e)| Series {
        name,
        values: &e.mean_cumulative_regret,
    }));
    std::fs::write(&svg, line_chart(&format!("Mean cumulative regret, {runs} runs"), &series))?;
    println!("wrote {svg}");
    Ok(())
}
