//! One episode of each UCL variant on a five-arm line.
//!
//!     cargo run --example select_arms

use ucl_bandit::env::{exponential_kernel, BanditInstance};
use ucl_bandit::inference::GaussianPrior;
use ucl_bandit::policy::{PolicyParams, Variant};
use ucl_bandit::sim::run_episode;

fn main() -> ucl_bandit::Result<()> {
    let coords: Vec<[f64; 2]> = (0..5).map(|i| [0.0, i as f64]).collect();
    let inst = BanditInstance::new(vec![2.0, 4.0, 6.0, 5.0, 3.0], 4.0)?.with_coords(coords.clone())?;
    let priors = [
        (Variant::Uninformative, GaussianPrior::uninformative(5)?),
        (Variant::Uncorrelated, GaussianPrior::uncorrelated(vec![4.0; 5], 4.0)?),
        (Variant::Correlated, GaussianPrior::new(vec![4.0; 5], exponential_kernel(&coords, 20.0, 2.0)?)?),
    ];
    for (variant, prior) in priors {
        let ep = run_episode(&inst, &prior, &PolicyParams::standard(variant), 300, 7)?;
        let first: Vec<String> = ep.choices.iter().take(12).map(|c| c.to_string()).collect();
        println!(
            "{variant:>13}: first picks {} | counts {:?} | regret {:.0} | init {}",
            first.join(" "),
            ep.counts,
            ep.final_regret(),
            ep.init_length
        );
    }
    Ok(())
}
