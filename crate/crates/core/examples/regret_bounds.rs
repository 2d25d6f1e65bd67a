//! Finite-time bounds for both prior families next to the Lai-Robbins curve.
//!
//!     cargo run --example regret_bounds

use ucl_bandit::bounds::{lai_robbins_lower_bound, theorem1_bound, theorem2_bound, BoundParams};
use ucl_bandit::env::{exponential_kernel, BanditInstance};
use ucl_bandit::inference::{conditional_confidences, GaussianPrior};

fn main() -> ucl_bandit::Result<()> {
    let coords = [[0.0, 0.0], [0.0, 1.0], [0.0, 2.0]];
    let inst = BanditInstance::new(vec![10.0, 8.0, 5.0], 10.0)?.with_coords(coords.to_vec())?;
    let horizon = 2000;

    println!("uncorrelated prior, σ₀² = 10 (δ² = 1), a = 4");
    for mu0 in [[9.0, 9.0, 6.0], [9.0, 7.0, 4.0], [11.0, 9.0, 6.0], [11.0, 7.0, 4.0]] {
        let prior = GaussianPrior::uncorrelated(mu0.to_vec(), 10.0)?;
        let r = theorem1_bound(&inst, &prior, &BoundParams::with_a(4.0), horizon)?;
        for b in &r.arms {
            println!(
                "  μ₀ {mu0:?} arm {}: {:<6} η = {:>4}  n̂ = {:>8.3}",
                b.arm, b.case.label(), b.eta, b.nhat
            );
        }
    }

    let prior = GaussianPrior::new(vec![9.0, 9.0, 6.0], exponential_kernel(&coords, 10.0, 1.0)?)?;
    let cond = conditional_confidences(&prior, 10.0)?;
    let params = BoundParams::with_a(5.0);
    let dmax = cond.iter().copied().fold(0.0, f64::max);
    println!("\ncorrelated prior, δ²_cond = {cond:.3?}, a = 5 (needs > {:.3})", params.min_admissible_a(dmax));
    let r = theorem2_bound(&inst, &prior, &params, 1.0, horizon)?;
    for b in &r.arms {
        println!("  arm {}: η = {:>4}  n̂ = {:>10.3}", b.arm, b.eta, b.nhat);
    }
    println!("  regret bound at T = {horizon}: {:.1}", r.regret_bound());

    let lb = lai_robbins_lower_bound(&inst, horizon)?;
    println!("\nLai-Robbins: {:.2} log t, {:.1} at T = {horizon}", lb.coefficient, lb.at(horizon));
    Ok(())
}
