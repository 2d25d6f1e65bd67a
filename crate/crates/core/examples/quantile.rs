//! UCL multipliers `Φ⁻¹(1 - α_t)` with `α_t = 1/(K t^a)`.
//!
//!     cargo run --example quantile

use ucl_bandit::policy::{inv_norm_cdf, PolicyParams, Variant};

fn main() -> ucl_bandit::Result<()> {
    println!("Φ⁻¹(0.975) = {:.9}", inv_norm_cdf(0.975)?);
    println!("Φ⁻¹(1e-300) = {:.6}", inv_norm_cdf(1e-300)?);

    for a in [1.0, 2.0] {
        let params = PolicyParams {
            a,
            ..PolicyParams::standard(Variant::Uncorrelated)
        };
        println!("\na = {a}");
        println!("{:>8} {:>12} {:>10}", "t", "alpha", "z");
        for t in [1u64, 10, 100, 1_000, 10_000, 1_000_000] {
            println!("{t:>8} {:>12.3e} {:>10.5}", params.alpha(t), params.multiplier(t)?);
        }
    }
    Ok(())
}
