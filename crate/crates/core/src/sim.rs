//! Seeded episodes and ensembles.
//!
//! Each episode owns a `ChaCha8Rng` seeded with `seed0 + run`; rewards are the
//! only consumer of randomness, so a run is a pure function of its config
//! and seed. Correlated episodes also check the posterior-variance
//! invariants as they go and log any violation instead of aborting.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::BoundReport;
use crate::env::{min_eigenvalue, sample_reward, BanditInstance};
use crate::error::{Error, Result};
use crate::inference::{conditional_confidences, correlation_norms, GaussianPrior, PosteriorState, Resync};
use crate::policy::{select_arm, Phase, PolicyParams, Variant};

/// Relative slack for the variance inequalities.
const INVARIANT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Experiment {
    pub instance: BanditInstance,
    pub prior: GaussianPrior,
    pub params: PolicyParams,
    pub horizon: u64,
    pub runs: usize,
    pub seed: u64,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        check_consistency(&self.instance, &self.prior, &self.params)?;
        if self.horizon == 0 {
            return Err(Error::config("run.horizon", "must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::config("run.runs", "must be at least 1"));
        }
        Ok(())
    }

    /// Seed of run `r`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

fn check_consistency(instance: &BanditInstance, prior: &GaussianPrior, params: &PolicyParams) -> Result<()> {
    if prior.arms() != instance.arms() {
        return Err(Error::config(
            "prior",
            format!("prior has {} arms, instance has {}", prior.arms(), instance.arms()),
        ));
    }
    let mismatch = match params.variant {
        Variant::Uninformative if !prior.is_uninformative() => Some("the uninformative variant needs the flat prior"),
        Variant::Uncorrelated if prior.is_uninformative() => {
            Some("the uncorrelated variant needs an informative prior; use the uninformative variant")
        }
        Variant::Uncorrelated if !prior.is_diagonal() => Some("the uncorrelated variant needs a diagonal prior"),
        Variant::Correlated if prior.is_uninformative() => Some("the correlated variant needs an informative prior"),
        _ => None,
    };
    match mismatch {
        Some(msg) => Err(Error::config("prior.variant", msg)),
        None => Ok(()),
    }
}

/// Which runtime invariant failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    /// Initialization took more than N steps.
    InitLength,
    /// A variance still exceeds `σ_s²/ν` when initialization ends.
    InitVariance,
    /// `σ_i² < σ_s² / (δ²_{i-cond} + n_i)`.
    VarianceLower,
    /// `σ_i² > σ_s² / (ν + n_i)` with `n_i` counted after initialization.
    VarianceUpper,
    /// A posterior variance increased.
    Monotonicity,
    /// Estimator variance below `n_i σ_i⁴ / σ_s²`.
    EstimatorLower,
    /// Estimator variance above `σ_i² Σ_j ρ_ij²`.
    EstimatorUpper,
    /// Sherman-Morrison drift above tolerance at a resync.
    Drift,
    /// Posterior covariance lost positive definiteness.
    NotPositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub step: u64,
    pub arm: Option<usize>,
    pub kind: InvariantKind,
    pub value: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {:?}", self.step, self.kind)?;
        if let Some(arm) = self.arm {
            write!(f, " at arm {arm}")?;
        }
        write!(f, " (value {}, bound {})", self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub seed: u64,
    pub choices: Vec<usize>,
    /// `m_{i*} - m_{i_t}` per step.
    pub regret: Vec<f64>,
    /// `Σ_i Δ_i n_i(t)` per step.
    pub cumulative_regret: Vec<f64>,
    pub counts: Vec<u64>,
    /// Selections made after the initialization phase.
    pub post_init_counts: Vec<u64>,
    pub init_length: u64,
    pub violations: Vec<Violation>,
    pub resyncs: Vec<Resync>,
}

impl EpisodeResult {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

/// Variance bookkeeping for the correlated checks.
struct Monitor {
    sampling_variance: f64,
    nu: f64,
    cond: Vec<f64>,
    previous: Vec<f64>,
}

impl Monitor {
    fn new(state: &PosteriorState, prior: &GaussianPrior, nu: f64) -> Result<Self> {
        let sv = state.sampling_variance();
        Ok(Self {
            sampling_variance: sv,
            nu,
            cond: conditional_confidences(prior, sv)?,
            previous: variances(state),
        })
    }

    /// `finished` is false when the horizon cut initialization short; the
    /// variance threshold only holds once it has run to completion.
    fn end_of_init(&self, state: &PosteriorState, step: u64, init_length: u64, finished: bool, log: &mut Vec<Violation>) {
        let n = state.arms() as u64;
        if init_length > n {
            log.push(Violation {
                step,
                arm: None,
                kind: InvariantKind::InitLength,
                value: init_length as f64,
                bound: n as f64,
            });
        }
        if !finished {
            return;
        }
        let threshold = self.sampling_variance / self.nu;
        for (i, v) in variances(state).into_iter().enumerate() {
            if exceeds(v, threshold) {
                log.push(Violation {
                    step,
                    arm: Some(i),
                    kind: InvariantKind::InitVariance,
                    value: v,
                    bound: threshold,
                });
            }
        }
    }

    /// O(N) checks after every update.
    fn step(&mut self, state: &PosteriorState, post_init: &[u64], in_ucb: bool, step: u64, log: &mut Vec<Violation>) {
        let sv = self.sampling_variance;
        let counts = state.counts();
        for i in 0..state.arms() {
            let v = state.variance(i).unwrap_or(f64::INFINITY);
            if exceeds(v, self.previous[i]) {
                log.push(Violation {
                    step,
                    arm: Some(i),
                    kind: InvariantKind::Monotonicity,
                    value: v,
                    bound: self.previous[i],
                });
            }
            self.previous[i] = v;
            if !in_ucb {
                continue;
            }
            let lower = sv / (self.cond[i] + counts[i] as f64);
            if exceeds(lower, v) {
                log.push(Violation {
                    step,
                    arm: Some(i),
                    kind: InvariantKind::VarianceLower,
                    value: v,
                    bound: lower,
                });
            }
            let upper = sv / (self.nu + post_init[i] as f64);
            if exceeds(v, upper) {
                log.push(Violation {
                    step,
                    arm: Some(i),
                    kind: InvariantKind::VarianceUpper,
                    value: v,
                    bound: upper,
                });
            }
        }
    }

    /// O(N³) checks at resync points.
    fn full(&self, state: &PosteriorState, resync: Resync, log: &mut Vec<Violation>) {
        let step = resync.step;
        if !resync.within_tolerance() {
            log.push(Violation {
                step,
                arm: None,
                kind: InvariantKind::Drift,
                value: resync.relative_drift,
                bound: crate::inference::RESYNC_TOLERANCE,
            });
        }
        let Some(sigma) = state.covariance() else { return };
        let min_eig = min_eigenvalue(&sigma);
        if min_eig <= 0.0 {
            log.push(Violation {
                step,
                arm: None,
                kind: InvariantKind::NotPositiveDefinite,
                value: min_eig,
                bound: 0.0,
            });
        }
        // Estimator variance of μ_i: Σ_j Σ_ij² n_j / σ_s².
        let sv = self.sampling_variance;
        let counts = state.counts();
        let norms = correlation_norms(state);
        for i in 0..state.arms() {
            let var_i = sigma[(i, i)];
            let est: f64 = (0..state.arms())
                .map(|j| sigma[(i, j)].powi(2) * counts[j] as f64 / sv)
                .sum();
            let lower = counts[i] as f64 * var_i * var_i / sv;
            if exceeds(lower, est) {
                log.push(Violation {
                    step,
                    arm: Some(i),
                    kind: InvariantKind::EstimatorLower,
                    value: est,
                    bound: lower,
                });
            }
            let upper = var_i * norms[i] * norms[i];
            if exceeds(est, upper) {
                log.push(Violation {
                    step,
                    arm: Some(i),
                    kind: InvariantKind::EstimatorUpper,
                    value: est,
                    bound: upper,
                });
            }
        }
    }
}

/// `value > bound` beyond relative rounding slack.
fn exceeds(value: f64, bound: f64) -> bool {
    value > bound + INVARIANT_TOLERANCE * bound.abs()
}

fn variances(state: &PosteriorState) -> Vec<f64> {
    (0..state.arms())
        .map(|i| state.variance(i).unwrap_or(f64::INFINITY))
        .collect()
}

/// Plays `horizon` steps of the policy against `instance`.
pub fn run_episode(
    instance: &BanditInstance,
    prior: &GaussianPrior,
    params: &PolicyParams,
    horizon: u64,
    seed: u64,
) -> Result<EpisodeResult> {
    check_consistency(instance, prior, params)?;
    if horizon == 0 {
        return Err(Error::config("run.horizon", "must be at least 1"));
    }
    let n = instance.arms();
    let gaps = instance.gaps();
    let correlated = params.variant == Variant::Correlated;
    let mut state = if correlated {
        PosteriorState::dense(prior, instance.sampling_variance())?
    } else {
        PosteriorState::new(prior, instance.sampling_variance())?
    };
    let mut monitor = if correlated {
        Some(Monitor::new(&state, prior, params.nu)?)
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = horizon as usize;
    let mut choices = Vec::with_capacity(steps);
    let mut regret = Vec::with_capacity(steps);
    let mut cumulative = Vec::with_capacity(steps);
    let mut post_init = vec![0u64; n];
    let mut init_length = 0u64;
    let mut in_ucb = false;
    let mut violations = Vec::new();
    let mut resyncs = Vec::new();

    for t in 1..=horizon {
        let decision = select_arm(&state, t, params)?;
        let arm = decision.arm;
        match decision.phase {
            Phase::Initialization => init_length += 1,
            Phase::Ucb => {
                if !in_ucb {
                    in_ucb = true;
                    if let Some(m) = &monitor {
                        m.end_of_init(&state, t, init_length, true, &mut violations);
                    }
                }
                post_init[arm] += 1;
            }
        }
        let reward = sample_reward(instance, arm, &mut rng)?;
        let resync = state.update(arm, reward)?;
        choices.push(arm);
        regret.push(gaps[arm]);
        cumulative.push(
            state
                .counts()
                .iter()
                .zip(&gaps)
                .map(|(&c, &g)| g * c as f64)
                .sum(),
        );
        if let Some(m) = monitor.as_mut() {
            m.step(&state, &post_init, in_ucb, t, &mut violations);
            if let Some(r) = resync {
                m.full(&state, r, &mut violations);
                resyncs.push(r);
            }
        }
    }

    if let Some(m) = &monitor {
        if state.t() % crate::inference::RESYNC_INTERVAL != 0 {
            let r = state.resync()?;
            m.full(&state, r, &mut violations);
            resyncs.push(r);
        }
        if !in_ucb {
            // the horizon ended inside the initialization phase
            m.end_of_init(&state, horizon, init_length, false, &mut violations);
        }
    }

    Ok(EpisodeResult {
        seed,
        choices,
        regret,
        cumulative_regret: cumulative,
        counts: state.counts().to_vec(),
        post_init_counts: post_init,
        init_length,
        violations,
        resyncs,
    })
}

/// Violation tagged with the run it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RunViolation {
    pub run: usize,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub runs: usize,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub mean_cumulative_regret: Vec<f64>,
    /// Pointwise standard error of the mean curve.
    pub sem: Vec<f64>,
    pub final_regrets: Vec<f64>,
    pub mean_counts: Vec<f64>,
    pub sem_counts: Vec<f64>,
    pub mean_post_init_counts: Vec<f64>,
    pub sem_post_init_counts: Vec<f64>,
    pub init_lengths: Vec<u64>,
    pub violations: Vec<RunViolation>,
    /// Largest Sherman-Morrison drift seen at any resync.
    pub max_drift: f64,
}

impl EnsembleResult {
    pub fn final_mean(&self) -> f64 {
        self.mean_cumulative_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_sem(&self) -> f64 {
        self.sem.last().copied().unwrap_or(0.0)
    }

    /// Mean regret per step over the inclusive step range `[from, to]` (1-based).
    pub fn mean_step_regret(&self, from: u64, to: u64) -> f64 {
        let at = |t: u64| if t == 0 { 0.0 } else { self.mean_cumulative_regret[t as usize - 1] };
        (at(to) - at(from - 1)) / (to - from + 1) as f64
    }
}

/// Sample mean and standard error; the error is 0 for a single sample.
pub fn mean_and_sem(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

/// Runs every episode of `experiment`, in parallel on the current rayon pool.
pub fn run_ensemble(experiment: &Experiment) -> Result<EnsembleResult> {
    experiment.validate()?;
    let episodes = (0..experiment.runs)
        .into_par_iter()
        .map(|r| {
            run_episode(
                &experiment.instance,
                &experiment.prior,
                &experiment.params,
                experiment.horizon,
                experiment.run_seed(r),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(&episodes, experiment.horizon))
}

/// Averages episodes that share a horizon and arm count.
pub fn aggregate(episodes: &[EpisodeResult], horizon: u64) -> EnsembleResult {
    let steps = horizon as usize;
    let (mean, sem): (Vec<f64>, Vec<f64>) = (0..steps)
        .map(|t| mean_and_sem(episodes.iter().map(|e| e.cumulative_regret[t])))
        .unzip();
    let arms = episodes.first().map_or(0, |e| e.counts.len());
    let per_arm = |f: fn(&EpisodeResult) -> &[u64]| -> (Vec<f64>, Vec<f64>) {
        (0..arms)
            .map(|i| mean_and_sem(episodes.iter().map(|e| f(e)[i] as f64)))
            .unzip()
    };
    let (mean_counts, sem_counts) = per_arm(|e| &e.counts);
    let (mean_post, sem_post) = per_arm(|e| &e.post_init_counts);
    EnsembleResult {
        runs: episodes.len(),
        horizon,
        seeds: episodes.iter().map(|e| e.seed).collect(),
        mean_cumulative_regret: mean,
        sem,
        final_regrets: episodes.iter().map(EpisodeResult::final_regret).collect(),
        mean_counts,
        sem_counts,
        mean_post_init_counts: mean_post,
        sem_post_init_counts: sem_post,
        init_lengths: episodes.iter().map(|e| e.init_length).collect(),
        violations: episodes
            .iter()
            .enumerate()
            .flat_map(|(run, e)| {
                e.violations.iter().map(move |v| RunViolation {
                    run,
                    violation: v.clone(),
                })
            })
            .collect(),
        max_drift: episodes
            .iter()
            .flat_map(|e| e.resyncs.iter().map(|r| r.relative_drift))
            .fold(0.0, f64::max),
    }
}

/// One row of the bound comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub arm: usize,
    /// Ensemble mean of post-initialization selections.
    pub empirical: f64,
    pub sem: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Compares ensemble counts against `η_i + n̂_i` for every suboptimal arm;
/// an arm passes when `mean - 3·SEM ≤ bound`.
pub fn verify_bounds(ensemble: &EnsembleResult, report: &BoundReport) -> Result<Vec<BoundCheck>> {
    if ensemble.horizon != report.horizon {
        return Err(Error::config(
            "run.horizon",
            format!("ensemble horizon {} but bound horizon {}", ensemble.horizon, report.horizon),
        ));
    }
    let arms = ensemble.mean_post_init_counts.len();
    report
        .arms
        .iter()
        .map(|b| {
            if b.arm >= arms {
                return Err(Error::config(
                    "bound",
                    format!("bound lists arm {} but the ensemble has {arms} arms", b.arm),
                ));
            }
            let empirical = ensemble.mean_post_init_counts[b.arm];
            let sem = ensemble.sem_post_init_counts[b.arm];
            let bound = b.total();
            Ok(BoundCheck {
                arm: b.arm,
                empirical,
                sem,
                bound,
                satisfied: empirical - 3.0 * sem <= bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{theorem1_bound, BoundParams};

    fn flat(n: usize) -> GaussianPrior {
        GaussianPrior::uninformative(n).unwrap()
    }

    #[test]
    fn single_arm_has_no_regret() {
        let inst = BanditInstance::new(vec![3.0], 10.0).unwrap();
        let ep = run_episode(&inst, &flat(1), &PolicyParams::standard(Variant::Uninformative), 50, 1).unwrap();
        assert!(ep.cumulative_regret.iter().all(|&r| r == 0.0));
        assert_eq!(ep.counts, vec![50]);
    }

    #[test]
    fn flat_prior_visits_every_arm_first() {
        let means: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let inst = BanditInstance::new(means, 10.0).unwrap();
        let ep = run_episode(&inst, &flat(100), &PolicyParams::standard(Variant::Uninformative), 150, 9).unwrap();
        let mut first: Vec<usize> = ep.choices[..100].to_vec();
        first.sort_unstable();
        first.dedup();
        assert_eq!(first.len(), 100);
    }

    #[test]
    fn regret_identity_and_counts() {
        let inst = BanditInstance::new(vec![1.0, 0.3, 0.0], 1.0).unwrap();
        let prior = GaussianPrior::uncorrelated(vec![0.0; 3], 5.0).unwrap();
        let ep = run_episode(&inst, &prior, &PolicyParams::standard(Variant::Uncorrelated), 300, 4).unwrap();
        assert_eq!(ep.counts.iter().sum::<u64>(), 300);
        let direct: f64 = ep.counts.iter().zip(inst.gaps()).map(|(&c, g)| g * c as f64).sum();
        assert_eq!(ep.final_regret(), direct);
        let summed: f64 = ep.regret.iter().sum();
        assert!((summed - direct).abs() < 1e-9);
    }

    #[test]
    fn variant_mismatch_is_a_config_error() {
        let inst = BanditInstance::new(vec![1.0, 0.0], 1.0).unwrap();
        let err = run_episode(&inst, &flat(2), &PolicyParams::standard(Variant::Correlated), 10, 0).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        let prior = GaussianPrior::uncorrelated(vec![0.0; 2], 5.0).unwrap();
        let err = run_episode(&inst, &prior, &PolicyParams::standard(Variant::Uninformative), 10, 0).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn correlated_episode_logs_nothing() {
        let coords: Vec<[f64; 2]> = (0..16).map(|i| [(i / 4) as f64, (i % 4) as f64]).collect();
        let means: Vec<f64> = coords.iter().map(|c| 10.0 - c[0] - c[1]).collect();
        let inst = BanditInstance::new(means, 10.0).unwrap();
        let cov = crate::env::exponential_kernel(&coords, 40.0, 2.0).unwrap();
        let prior = GaussianPrior::new(vec![0.0; 16], cov).unwrap();
        let ep = run_episode(&inst, &prior, &PolicyParams::standard(Variant::Correlated), 600, 2).unwrap();
        assert!(ep.violations.is_empty(), "{:?}", &ep.violations[..ep.violations.len().min(3)]);
        assert!(ep.init_length >= 1 && ep.init_length <= 16);
        assert_eq!(ep.post_init_counts.iter().sum::<u64>() + ep.init_length, 600);
        assert_eq!(ep.resyncs.len(), 3);
    }

    #[test]
    fn horizon_inside_initialization_is_not_a_violation() {
        let coords: Vec<[f64; 2]> = (0..5).map(|i| [0.0, i as f64]).collect();
        let inst = BanditInstance::new(vec![2.0, -1.0, 0.5, 2.0, 1.5], 4.0).unwrap();
        let cov = crate::env::exponential_kernel(&coords, 20.0, 2.0).unwrap();
        let prior = GaussianPrior::new(vec![0.0; 5], cov).unwrap();
        for horizon in 1..=3 {
            let ep = run_episode(&inst, &prior, &PolicyParams::standard(Variant::Correlated), horizon, 0).unwrap();
            assert_eq!(ep.init_length, horizon);
            assert!(ep.violations.is_empty(), "{:?}", ep.violations);
        }
    }

    #[test]
    fn one_run_ensemble_equals_episode() {
        let inst = BanditInstance::new(vec![1.0, 0.0], 1.0).unwrap();
        let exp = Experiment {
            instance: inst.clone(),
            prior: flat(2),
            params: PolicyParams::standard(Variant::Uninformative),
            horizon: 40,
            runs: 1,
            seed: 11,
        };
        let ens = run_ensemble(&exp).unwrap();
        let ep = run_episode(&inst, &flat(2), &exp.params, 40, 11).unwrap();
        assert_eq!(ens.mean_cumulative_regret, ep.cumulative_regret);
        assert!(ens.sem.iter().all(|&s| s == 0.0));
        assert_eq!(ens, run_ensemble(&exp).unwrap());
    }

    #[test]
    fn verify_shape_at_horizon_one() {
        let inst = BanditInstance::new(vec![5.0, 0.0, 1.0], 10.0).unwrap();
        let prior = GaussianPrior::uncorrelated(inst.means().to_vec(), 10.0).unwrap();
        let exp = Experiment {
            instance: inst.clone(),
            prior: prior.clone(),
            params: PolicyParams::standard(Variant::Uncorrelated),
            horizon: 1,
            runs: 5,
            seed: 0,
        };
        let ens = run_ensemble(&exp).unwrap();
        let report = theorem1_bound(&inst, &prior, &BoundParams::with_a(4.0), 1).unwrap();
        let rows = verify_bounds(&ens, &report).unwrap();
        assert_eq!(rows.iter().map(|r| r.arm).collect::<Vec<_>>(), vec![1, 2]);
        assert!(rows.iter().all(|r| r.satisfied && r.bound >= 1.0));

        let other = theorem1_bound(&inst, &prior, &BoundParams::with_a(4.0), 2).unwrap();
        assert!(verify_bounds(&ens, &other).is_err());
    }

    #[test]
    fn sem_arithmetic() {
        let (m, s) = mean_and_sem([1.0, 2.0, 3.0, 4.0].into_iter());
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
