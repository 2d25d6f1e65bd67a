//! Numeric sweeps of the Gaussian tail and difference-of-squares inequalities.
//!
//!     cargo run --release --example lemma_checks -- 10000

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ucl_bandit::bounds::{check_lemma1, check_lemma2};

fn main() -> ucl_bandit::Result<()> {
    let resolution: usize = std::env::args().nth(1).map_or(10_000, |s| s.parse().expect("resolution"));
    print!("{}", check_lemma1(resolution)?);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    print!("{}", check_lemma2(100 * resolution, &mut rng));
    Ok(())
}
