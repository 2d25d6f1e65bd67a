//! Sequential information-form updates against the batch posterior.
//!
//!     cargo run --example posterior_updates

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use ucl_bandit::env::exponential_kernel;
use ucl_bandit::inference::{batch_posterior, GaussianPrior, PosteriorState};

fn main() -> ucl_bandit::Result<()> {
    let coords: Vec<[f64; 2]> = (0..5).map(|i| [0.0, i as f64]).collect();
    let prior = GaussianPrior::new(vec![0.0; 5], exponential_kernel(&coords, 10.0, 2.0)?)?;
    let truth = [3.0, 5.0, 4.0, 1.0, 0.0];
    let sv = 10.0;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = PosteriorState::dense(&prior, sv)?;
    for _ in 0..1000 {
        let arm = rng.random_range(0..2);
        let r = Normal::new(truth[arm], sv.sqrt()).unwrap().sample(&mut rng);
        if let Some(resync) = state.update(arm, r)? {
            println!("resync at step {}: drift {:.2e}", resync.step, resync.relative_drift);
        }
    }
    println!("counts {:?}", state.counts());
    let mean: Vec<String> = state.mean().iter().map(|m| format!("{m:.3}")).collect();
    println!("posterior mean [{}]", mean.join(", "));
    let sd: Vec<String> = (0..5).map(|i| format!("{:.3}", state.variance(i).unwrap().sqrt())).collect();
    println!("posterior sd   [{}]", sd.join(", "));
    println!("arms 2..4 were never sampled; their estimates move through the kernel correlation");

    let (mu, lambda) = batch_posterior(&prior, state.counts(), &state.empirical_means(), sv)?;
    let sigma: DMatrix<f64> = lambda.try_inverse().expect("precision is invertible");
    println!(
        "batch vs sequential: mean {:.1e}, covariance {:.1e}",
        (&mu - state.mean()).amax(),
        (&sigma - state.covariance().unwrap()).amax()
    );
    Ok(())
}
