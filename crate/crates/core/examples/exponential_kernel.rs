//! Exponential-kernel prior covariance on a grid.
//!
//!     cargo run --example exponential_kernel -- 10 4.0

use ucl_bandit::env::{exponential_kernel, RewardSurfaceSpec};
use ucl_bandit::inference::{conditional_variance, GaussianPrior};

fn main() -> ucl_bandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: usize = args.next().map_or(10, |s| s.parse().expect("grid side"));
    let length_scale: f64 = args.next().map_or(2.0, |s| s.parse().expect("length scale"));

    let spec = RewardSurfaceSpec {
        rows: side,
        cols: side,
        base_value: 0.0,
        patches: vec![],
    };
    let coords = spec.coords();
    let cov = exponential_kernel(&coords, 10.0, length_scale)?;
    let eig = cov.clone().symmetric_eigen().eigenvalues;
    println!("{}x{side} grid, length scale {length_scale}", side);
    println!("eigenvalues in [{:.3e}, {:.3e}]", eig.min(), eig.max());
    println!("correlation with the corner cell along row 0:");
    for c in 0..side.min(6) {
        print!(" {:.3}", cov[(0, c)] / 10.0);
    }
    println!();

    let prior = GaussianPrior::new(vec![0.0; coords.len()], cov.clone())?;
    let centre = side / 2 * side + side / 2;
    println!(
        "conditional variance: corner {:.4}, centre {:.4} (marginal 10)",
        conditional_variance(prior.covariance(), 0)?,
        conditional_variance(prior.covariance(), centre)?
    );
    Ok(())
}
