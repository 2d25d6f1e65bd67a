//! Finite-time regret bounds for the UCL policies and numeric lemma checks.
//!
//! Both bounds have the shape `E[n_i(T)] ≤ η_i + n̂_i(T)` for every
//! suboptimal arm: `η_i` is the logarithmic part, the number of pulls after
//! which the credible interval is narrower than the gap, and `n̂_i(T)` is a
//! constant that grows exponentially with the prior's error.

use std::fmt;

use nalgebra::DVector;
use rand::Rng;

use crate::env::BanditInstance;
use crate::error::{Error, Result};
use crate::inference::{conditional_confidences, GaussianPrior};
use crate::policy::{default_k, norm_sf, upper_quantile};

/// Constants of the bound analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub epsilon: f64,
    pub a: f64,
    pub k: f64,
}

impl BoundParams {
    pub fn new(epsilon: f64, a: f64, k: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("a must be positive, got {a}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Parameter(format!("K must be positive, got {k}")));
        }
        Ok(Self { epsilon, a, k })
    }

    /// `ε = 1/√10`, `K = √(2πe)` and the given `a`.
    pub fn with_a(a: f64) -> Self {
        Self {
            epsilon: 1.0 / 10f64.sqrt(),
            a,
            k: default_k(),
        }
    }

    /// `c₁ = (1-ε) / (1 + δ² - ε)`.
    pub fn c1(&self, delta_sq: f64) -> f64 {
        (1.0 - self.epsilon) / (1.0 + delta_sq - self.epsilon)
    }

    /// `c₂ = (1-ε) / δ²`; infinite for the flat prior.
    pub fn c2(&self, delta_sq: f64) -> f64 {
        (1.0 - self.epsilon) / delta_sq
    }

    /// Smallest `a` for which `3 a c₁ > 4`: `(4/3)(1 + δ²/(1-ε))`.
    pub fn min_admissible_a(&self, delta_sq: f64) -> f64 {
        4.0 / 3.0 * (1.0 + delta_sq / (1.0 - self.epsilon))
    }

    pub fn check_admissible(&self, delta_sq: f64) -> Result<()> {
        let min = self.min_admissible_a(delta_sq);
        if self.a > min {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "a = {} is not admissible for delta^2 = {delta_sq}: need a > {min}",
                self.a
            )))
        }
    }

    /// `3ac₁ / (2(3ac₁ - 4))`, the tail-sum constant.
    fn tail_constant(&self, delta_sq: f64) -> f64 {
        let x = 3.0 * self.a * self.c1(delta_sq);
        x / (2.0 * (x - 4.0))
    }

    /// `a / (K (a - 1))`, the sum of `α_t` over all steps.
    fn alpha_sum(&self) -> f64 {
        self.a / (self.k * (self.a - 1.0))
    }
}

/// Which branch of the bound produced `n̂_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    /// Optimal arm underestimated (`Δm_{i*} > 0`), arm `i` overestimated (`Δm_i < 0`).
    OptimalLowArmHigh,
    /// Optimal arm underestimated, arm `i` not overestimated.
    OptimalLow,
    /// Optimal arm not underestimated, arm `i` overestimated.
    ArmHigh,
    /// Optimal arm not underestimated, arm `i` not overestimated.
    Favourable,
    /// Flat prior: prior errors carry no weight.
    Uninformative,
    /// Correlated bound, which covers the worst case only.
    Correlated,
}

impl BoundCase {
    fn classify(dm_best: f64, dm_arm: f64) -> Self {
        match (dm_best > 0.0, dm_arm < 0.0) {
            (true, true) => BoundCase::OptimalLowArmHigh,
            (true, false) => BoundCase::OptimalLow,
            (false, true) => BoundCase::ArmHigh,
            (false, false) => BoundCase::Favourable,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundCase::OptimalLowArmHigh => "case1",
            BoundCase::OptimalLow => "case2",
            BoundCase::ArmHigh => "case3",
            BoundCase::Favourable => "case4",
            BoundCase::Uninformative => "uninformative",
            BoundCase::Correlated => "correlated",
        }
    }
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bound for one suboptimal arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmBound {
    pub arm: usize,
    /// `Δ_i = m_{i*} - m_i`.
    pub gap: f64,
    /// `Δm_i = m_i - μ⁰_i`.
    pub prior_error: f64,
    pub case: BoundCase,
    pub eta: u64,
    pub nhat: f64,
}

impl ArmBound {
    /// `η_i + n̂_i(T)`.
    pub fn total(&self) -> f64 {
        self.eta as f64 + self.nhat
    }
}

/// `t ↦ c log t`, the asymptotic lower bound on cumulative regret.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundCurve {
    pub coefficient: f64,
}

impl LowerBoundCurve {
    pub fn at(&self, t: u64) -> f64 {
        self.coefficient * (t as f64).ln()
    }

    /// Values for `t = 1..=horizon`.
    pub fn curve(&self, horizon: u64) -> Vec<f64> {
        (1..=horizon).map(|t| self.at(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub horizon: u64,
    pub optimal_arm: usize,
    /// One entry per suboptimal arm, in arm order.
    pub arms: Vec<ArmBound>,
    pub lower_bound: LowerBoundCurve,
}

impl BoundReport {
    /// `Σ_i Δ_i (η_i + n̂_i)`, a bound on cumulative expected regret.
    pub fn regret_bound(&self) -> f64 {
        self.arms.iter().map(|b| b.gap * b.total()).sum()
    }

    pub fn arm(&self, arm: usize) -> Option<&ArmBound> {
        self.arms.iter().find(|b| b.arm == arm)
    }
}

/// `η = max{1, ⌈(4σ_s²/Δ²)(2 log K + 2a log T) - offset⌉}`.
pub fn eta(sampling_variance: f64, gap: f64, params: &BoundParams, horizon: u64, offset: f64) -> u64 {
    let log_term = 2.0 * params.k.ln() + 2.0 * params.a * (horizon as f64).ln();
    let x = (4.0 * sampling_variance / (gap * gap) * log_term - offset).ceil();
    if x.is_nan() || x < 1.0 {
        1
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

fn require_unique_best(instance: &BanditInstance) -> Result<usize> {
    instance.unique_best_arm().ok_or_else(|| {
        Error::Parameter("bounds need a unique optimal arm; several arms share the largest mean".into())
    })
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        Err(Error::Parameter("horizon must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_prior_fits(instance: &BanditInstance, prior: &GaussianPrior) -> Result<()> {
    if prior.arms() != instance.arms() {
        return Err(Error::Parameter(format!(
            "prior has {} arms, instance has {}",
            prior.arms(),
            instance.arms()
        )));
    }
    Ok(())
}

/// Bound on suboptimal selections of the UCL policy with an uncorrelated
/// (or flat) prior.
pub fn theorem1_bound(
    instance: &BanditInstance,
    prior: &GaussianPrior,
    params: &BoundParams,
    horizon: u64,
) -> Result<BoundReport> {
    check_prior_fits(instance, prior)?;
    check_horizon(horizon)?;
    let sv = instance.sampling_variance();
    let delta_sq = prior.confidence(sv).ok_or_else(|| {
        Error::Prior("the uncorrelated bound needs a diagonal prior with a common variance".into())
    })?;
    params.check_admissible(delta_sq)?;
    if params.a <= 1.0 {
        return Err(Error::Parameter("a must exceed 1".into()));
    }
    let best = require_unique_best(instance)?;
    let mu0 = prior.mean();
    let dm_best = instance.mean(best) - mu0[best];

    let arms = (0..instance.arms())
        .filter(|&i| i != best)
        .map(|i| {
            let gap = instance.gap(i);
            let dm = instance.mean(i) - mu0[i];
            let eta = eta(sv, gap, params, horizon, delta_sq);
            let (case, nhat) = if prior.is_uninformative() {
                (BoundCase::Uninformative, 2.0 * params.alpha_sum())
            } else {
                let prior_var = sv / delta_sq;
                let case = BoundCase::classify(dm_best, dm);
                (case, uncorrelated_nhat(case, dm_best, dm, eta, delta_sq, prior_var, params))
            };
            ArmBound {
                arm: i,
                gap,
                prior_error: dm,
                case,
                eta,
                nhat,
            }
        })
        .collect();

    Ok(BoundReport {
        horizon,
        optimal_arm: best,
        arms,
        lower_bound: lai_robbins_lower_bound(instance, horizon)?,
    })
}

/// `n̂_i(T)` in the four sign regimes of the prior errors.
fn uncorrelated_nhat(
    case: BoundCase,
    dm_best: f64,
    dm_arm: f64,
    eta: u64,
    delta_sq: f64,
    prior_var: f64,
    params: &BoundParams,
) -> f64 {
    let a = params.a;
    let c2 = params.c2(delta_sq);
    let tail = params.tail_constant(delta_sq);
    let eta = eta as f64;

    let optimal_term = || {
        let x = dm_best * dm_best / prior_var;
        (2.0 * delta_sq * x / (3.0 * a)).exp().max((2.0 * x / (3.0 * a)).exp())
            + tail * (c2 * delta_sq * x / 2.0).exp()
    };
    let arm_term = || {
        let x = dm_arm * dm_arm / (prior_var * eta);
        (2.0 * delta_sq * x / (3.0 * a)).exp() + tail * (c2 * delta_sq * x / 2.0).exp()
    };
    let alpha_sum = params.alpha_sum();

    match case {
        BoundCase::OptimalLowArmHigh => optimal_term() + arm_term(),
        BoundCase::OptimalLow => optimal_term() + alpha_sum,
        BoundCase::ArmHigh => arm_term() + alpha_sum,
        _ => 2.0 * alpha_sum,
    }
}

/// Bound on suboptimal selections of the correlated UCL policy after its
/// initialization phase.
///
/// `c₁`, `c₂` and the admissibility of `a` use the largest conditional
/// confidence `max_i δ²_{i-cond}`.
pub fn theorem2_bound(
    instance: &BanditInstance,
    prior: &GaussianPrior,
    params: &BoundParams,
    nu: f64,
    horizon: u64,
) -> Result<BoundReport> {
    check_prior_fits(instance, prior)?;
    check_horizon(horizon)?;
    if prior.is_uninformative() {
        return Err(Error::Prior("the correlated bound needs an informative prior".into()));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Parameter(format!("nu must lie in (0, 1], got {nu}")));
    }
    let sv = instance.sampling_variance();
    let cond = conditional_confidences(prior, sv)?;
    let delta_sq = cond.iter().copied().fold(0.0, f64::max);
    params.check_admissible(delta_sq)?;
    let best = require_unique_best(instance)?;

    let beta = beta_coefficients(prior, instance.means(), sv, nu)?;
    let a = params.a;
    let c2 = params.c2(delta_sq);
    let tail = params.tail_constant(delta_sq);
    let (beta_best, cond_best) = (beta[best], cond[best]);
    let optimal_term = (2.0 * beta_best.powi(2) * cond_best / (3.0 * a * nu * (1.0 + cond_best)))
        .exp()
        .max((2.0 * beta_best.powi(2) / (3.0 * a)).exp())
        + tail * (c2 * beta_best.powi(2) / 2.0).exp();

    let mu0 = prior.mean();
    let arms = (0..instance.arms())
        .filter(|&i| i != best)
        .map(|i| {
            let gap = instance.gap(i);
            let b2 = beta[i].powi(2);
            let nhat = optimal_term + (2.0 * b2 / (3.0 * a)).exp() + tail * (c2 * b2 / 2.0).exp();
            ArmBound {
                arm: i,
                gap,
                prior_error: instance.mean(i) - mu0[i],
                case: BoundCase::Correlated,
                eta: eta(sv, gap, params, horizon, nu),
                nhat,
            }
        })
        .collect();

    Ok(BoundReport {
        horizon,
        optimal_arm: best,
        arms,
        lower_bound: lai_robbins_lower_bound(instance, horizon)?,
    })
}

/// `β_i = sqrt(σ_s² (1 + δ²_{i-cond}) / ν) Σ_j Σ_k |λ⁰_kj| |μ⁰_j - m_j|`.
pub fn beta_coefficients(
    prior: &GaussianPrior,
    true_means: &[f64],
    sampling_variance: f64,
    nu: f64,
) -> Result<Vec<f64>> {
    if true_means.len() != prior.arms() {
        return Err(Error::Parameter(format!(
            "{} true means for a {}-arm prior",
            true_means.len(),
            prior.arms()
        )));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Parameter(format!("nu must lie in (0, 1], got {nu}")));
    }
    let lambda0 = prior.precision()?;
    let abs_error = DVector::from_iterator(
        true_means.len(),
        prior.mean().iter().zip(true_means).map(|(p, m)| (p - m).abs()),
    );
    let weighted: f64 = (lambda0.abs() * abs_error).sum();
    Ok(conditional_confidences(prior, sampling_variance)?
        .into_iter()
        .map(|d| (sampling_variance * (1.0 + d) / nu).sqrt() * weighted)
        .collect())
}

/// Lai-Robbins curve for Gaussian arms with a common variance:
/// `Σ_{Δ_i > 0} (2σ_s²/Δ_i) log t`.
///
/// Every arm attaining the largest mean counts as optimal.
pub fn lai_robbins_lower_bound(instance: &BanditInstance, horizon: u64) -> Result<LowerBoundCurve> {
    check_horizon(horizon)?;
    let sv = instance.sampling_variance();
    let coefficient = instance
        .gaps()
        .into_iter()
        .filter(|&g| g > 0.0)
        .map(|g| 2.0 * sv / g)
        .fold(0.0, |acc, x| acc + x);
    Ok(LowerBoundCurve { coefficient })
}

/// Outcome of one numeric inequality sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub points: usize,
    /// Number of points outside the inequality's domain, not evaluated.
    pub skipped: usize,
    pub violations: usize,
    /// First few violating points.
    pub witnesses: Vec<String>,
}

impl InequalityCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            points: 0,
            skipped: 0,
            violations: 0,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, holds: bool, witness: impl FnOnce() -> String) {
        self.points += 1;
        if !holds {
            self.violations += 1;
            if self.witnesses.len() < 5 {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for InequalityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} points, {} violations",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.points,
            self.violations
        )?;
        if self.skipped > 0 {
            write!(f, ", {} outside domain", self.skipped)?;
        }
        for w in &self.witnesses {
            write!(f, "\n    at {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub checks: Vec<InequalityCheck>,
    /// Checks reported for information that do not decide `passed`.
    pub diagnostics: Vec<InequalityCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(InequalityCheck::passed)
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for c in &self.diagnostics {
            writeln!(f, "(diagnostic) {c}")?;
        }
        Ok(())
    }
}

/// Relative slack for the non-strict inequalities, which are tight at a point.
const WEAK_SLACK: f64 = 1e-12;

fn weak_le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + WEAK_SLACK * rhs.abs().max(lhs.abs())
}

/// Gaussian tail and quantile inequalities on uniform grids of `resolution` points.
///
/// * `w ∈ [0, 10]`: `P(z ≥ w) ≤ 2e^{-w²/2} / (√(2π)(w + √(w²+8/π))) ≤ e^{-w²/2}/2`
///   and `P(z ≥ w) ≥ √(2/π) e^{-w²/2} / (w + √(w²+4))`.
/// * `α ∈ (1e-9, 0.5]`: `Φ⁻¹(1-α) ≤ √(-2 log α)`, and
///   `Φ⁻¹(1-α) > √(-log(2πα²(1 - log(2πα²))))` wherever the radicand is positive.
/// * `t ∈ {1..resolution}`, `a ∈ {1.5, 2, 3}`:
///   `Φ⁻¹(1 - 1/(√(2πe) t^a)) > √((3a/2) log t)`, with `t = 1` accepted as `≥`.
pub fn check_lemma1(resolution: usize) -> Result<LemmaReport> {
    if resolution < 2 {
        return Err(Error::Parameter("lemma 1 needs at least 2 grid points".into()));
    }
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let pi = std::f64::consts::PI;

    let mut upper_mid = InequalityCheck::new("lemma1.i tail <= rational bound");
    let mut upper_outer = InequalityCheck::new("lemma1.i rational bound <= exp(-w^2/2)/2");
    let mut lower = InequalityCheck::new("lemma1.i tail >= lower rational bound");
    for k in 0..resolution {
        let w = 10.0 * k as f64 / (resolution - 1) as f64;
        let tail = norm_sf(w);
        let g = (-w * w / 2.0).exp();
        let mid = 2.0 * g / (sqrt_2pi * (w + (w * w + 8.0 / pi).sqrt()));
        let low = (2.0 / pi).sqrt() * g / (w + (w * w + 4.0).sqrt());
        upper_mid.record(weak_le(tail, mid), || format!("w={w}: {tail} > {mid}"));
        upper_outer.record(weak_le(mid, 0.5 * g), || format!("w={w}: {mid} > {}", 0.5 * g));
        lower.record(weak_le(low, tail), || format!("w={w}: {tail} < {low}"));
    }

    let mut quant_upper = InequalityCheck::new("lemma1.ii quantile <= sqrt(-2 log alpha)");
    let mut quant_lower = InequalityCheck::new("lemma1.ii quantile > sqrt(-log(2 pi a^2 (1 - log(2 pi a^2))))");
    let mut quant_lower_branch =
        InequalityCheck::new("lemma1.ii quantile lower bound restricted to 2 pi a^2 <= 1");
    let (lo, hi) = (1e-9, 0.5);
    for k in 1..=resolution {
        let alpha = lo + (hi - lo) * k as f64 / resolution as f64;
        let z = upper_quantile(alpha)?;
        let up = (-2.0 * alpha.ln()).sqrt();
        quant_upper.record(weak_le(z, up), || format!("alpha={alpha}: {z} > {up}"));

        let s = 2.0 * pi * alpha * alpha;
        let radicand = -(s * (1.0 - s.ln())).ln();
        let on_branch = s <= 1.0;
        if radicand > 0.0 {
            let bound = radicand.sqrt();
            let holds = z > bound;
            let witness = || format!("alpha={alpha}: {z} <= {bound}");
            quant_lower.record(holds, witness);
            if on_branch {
                quant_lower_branch.record(holds, witness);
            } else {
                quant_lower_branch.skipped += 1;
            }
        } else {
            quant_lower.skipped += 1;
            quant_lower_branch.skipped += 1;
        }
    }

    let mut growth = InequalityCheck::new("lemma1.ii quantile(1 - 1/(K t^a)) > sqrt(1.5 a log t)");
    let k = default_k();
    for &a in &[1.5, 2.0, 3.0] {
        for t in 1..=resolution as u64 {
            let z = upper_quantile(1.0 / (k * (t as f64).powf(a)))?;
            let bound = (1.5 * a * (t as f64).ln()).sqrt();
            let holds = if t == 1 { z >= bound } else { z > bound };
            growth.record(holds, || format!("a={a}, t={t}: {z} <= {bound}"));
        }
    }

    Ok(LemmaReport {
        checks: vec![upper_mid, upper_outer, lower, quant_upper, quant_lower, growth],
        diagnostics: vec![quant_lower_branch],
    })
}

/// Whether `(c₁, c₂)` satisfies `(1 - c₁)(1 + c₂) ≥ 1`, up to rounding of
/// the product.
pub fn lemma2_admissible(c1: f64, c2: f64) -> bool {
    (1.0 - c1) * (1.0 + c2) >= 1.0 - 1e-12
}

/// Does `(x - y)² ≥ c₁x² - c₂y²` hold, up to rounding?
pub fn lemma2_holds(c1: f64, c2: f64, x: f64, y: f64) -> bool {
    let lhs = (x - y) * (x - y);
    let rhs = c1 * x * x - c2 * y * y;
    let scale = (x * x + y * y) * (1.0 + c1.abs() + c2.abs());
    lhs >= rhs - 1e-10 * scale
}

/// `(x - y)² ≥ c₁x² - c₂y²` for `samples` random admissible tuples.
///
/// `c₁` is uniform on `[-2, 1)` and `c₂` is drawn above its admissibility
/// threshold `c₁/(1 - c₁)`, hitting the threshold exactly for every tenth
/// sample. `x`, `y` are uniform on `[-1e6, 1e6]`; every twentieth sample
/// uses `x = y`.
pub fn check_lemma2<R: Rng + ?Sized>(samples: usize, rng: &mut R) -> LemmaReport {
    let mut check = InequalityCheck::new("lemma2 difference of squares");
    let mut rejected = 0usize;
    while check.points < samples {
        let c1: f64 = rng.random_range(-2.0..1.0);
        let threshold = c1 / (1.0 - c1);
        let c2 = if check.points.is_multiple_of(10) {
            threshold
        } else {
            threshold + rng.random_range(0.0..5.0)
        };
        if !lemma2_admissible(c1, c2) {
            rejected += 1;
            if rejected > samples {
                break;
            }
            continue;
        }
        let x: f64 = rng.random_range(-1e6..=1e6);
        let y = if check.points.is_multiple_of(20) { x } else { rng.random_range(-1e6..=1e6) };
        check.record(lemma2_holds(c1, c2, x, y), || {
            format!("c1={c1}, c2={c2}, x={x}, y={y}")
        });
    }
    check.skipped = rejected;
    LemmaReport {
        checks: vec![check],
        diagnostics: vec![],
    }
}
