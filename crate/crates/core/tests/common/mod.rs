//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use ucl_bandit::inference::{batch_posterior, conditional_variance, GaussianPrior, PosteriorState};

/// Largest entrywise difference relative to the largest entry of `want`.
pub fn rel_err_mat(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
    let scale = want.amax().max(f64::MIN_POSITIVE);
    (got - want).amax() / scale
}

pub fn rel_err_vec(got: &DVector<f64>, want: &DVector<f64>) -> f64 {
    let scale = want.amax().max(1e-300);
    (got - want).amax() / scale
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Random SPD matrix `10 (A Aᵀ / n + I / 2)` with standard normal `A`.
pub fn random_spd<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let m = (&a * a.transpose()) / n as f64 + DMatrix::identity(n, n) * 0.5;
    (&m + m.transpose()) * 5.0
}

/// Worst relative errors over one batch of random inference configurations.
#[derive(Debug, Default, Clone, Copy)]
pub struct Equivalence {
    pub sequential_vs_batch: f64,
    pub sherman_morrison_vs_inverse: f64,
    pub diagonal_closed_form: f64,
    pub conditional_vs_precision: f64,
}

/// `configs` random priors with `N ∈ 2..=8`, each followed along a 50-step
/// trajectory of random arms and rewards.
///
/// * sequential posterior (mean and precision) vs the batch formula at every step;
/// * sequential covariance vs the direct inverse of the batch precision;
/// * a diagonal prior tracked in the dense representation vs the per-arm
///   closed forms `μ = (δ²μ₀ + n m̄)/(δ² + n)`, `σ² = σ_s²/(δ² + n)`;
/// * Schur-complement conditional variance vs `1 / (Σ₀⁻¹)_ii`.
pub fn inference_equivalence<R: Rng>(configs: usize, rng: &mut R) -> Equivalence {
    let mut worst = Equivalence::default();
    let bump = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for _ in 0..configs {
        let n = rng.random_range(2..=8);
        let sv = rng.random_range(0.5..20.0);
        let cov = random_spd(n, rng);
        let mu0: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let truth: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let prior = GaussianPrior::new(mu0.clone(), cov.clone()).unwrap();

        let diag_vars: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..50.0)).collect();
        let diag_prior =
            GaussianPrior::new(mu0.clone(), DMatrix::from_diagonal(&DVector::from_vec(diag_vars.clone()))).unwrap();

        let mut st = PosteriorState::dense(&prior, sv).unwrap();
        let mut diag = PosteriorState::dense(&diag_prior, sv).unwrap();
        let mut counts = vec![0u64; n];
        let mut sums = vec![0.0; n];
        for _ in 0..50 {
            let arm = rng.random_range(0..n);
            let r = Normal::new(truth[arm], sv.sqrt()).unwrap().sample(rng);
            st.update(arm, r).unwrap();
            diag.update(arm, r).unwrap();
            counts[arm] += 1;
            sums[arm] += r;

            let means: Vec<f64> = (0..n)
                .map(|i| if counts[i] > 0 { sums[i] / counts[i] as f64 } else { 0.0 })
                .collect();
            let (mu, lambda) = batch_posterior(&prior, &counts, &means, sv).unwrap();
            bump(&mut worst.sequential_vs_batch, rel_err_vec(st.mean(), &mu));
            bump(&mut worst.sequential_vs_batch, rel_err_mat(&st.precision(), &lambda));
            let direct = lambda.clone().try_inverse().unwrap();
            bump(
                &mut worst.sherman_morrison_vs_inverse,
                rel_err_mat(&st.covariance().unwrap(), &direct),
            );

            for i in 0..n {
                let d2 = sv / diag_vars[i];
                let c = counts[i] as f64;
                let mu_i = (d2 * mu0[i] + sums[i]) / (d2 + c);
                let var_i = sv / (d2 + c);
                bump(&mut worst.diagonal_closed_form, rel_err(diag.mean()[i], mu_i));
                bump(&mut worst.diagonal_closed_form, rel_err(diag.variance(i).unwrap(), var_i));
            }
        }

        let lambda0 = cov.clone().try_inverse().unwrap();
        for i in 0..n {
            let cv = conditional_variance(&cov, i).unwrap();
            bump(&mut worst.conditional_vs_precision, rel_err(cv, 1.0 / lambda0[(i, i)]));
        }
    }
    worst
}

/// Block-diagonal prior of two 3-arm clusters, `100 (𝟙𝟙ᵀ + 0.01 E)` per
/// block with `E` having `off` off the diagonal.
pub fn two_cluster_prior(off: f64) -> GaussianPrior {
    let mut cov = DMatrix::zeros(6, 6);
    for block in 0..2 {
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 0.0 } else { off };
                cov[(3 * block + i, 3 * block + j)] = 100.0 * (1.0 + 0.01 * e);
            }
        }
    }
    GaussianPrior::new(vec![0.0; 6], cov).unwrap()
}
