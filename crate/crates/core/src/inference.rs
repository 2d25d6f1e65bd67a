//! Conjugate Gaussian inference over the vector of arm means.
//!
//! The posterior is carried in two parameterizations at once: the precision
//! `Λ` and information vector `q`, which absorb an observation additively,
//! and the covariance `Σ`, which is kept current with a Sherman-Morrison
//! rank-1 downdate. Every [`RESYNC_INTERVAL`] updates `Σ` is re-solved from
//! `Λ` and the drift between the two is reported.
//!
//! Uncorrelated and uninformative priors use a diagonal backing that stores
//! per-arm precisions only; it is exact and O(1) per update.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_arm, Error, Result};

/// Number of rank-1 updates between re-solves of `Σ` from `Λ`.
pub const RESYNC_INTERVAL: u64 = 256;

/// Largest accepted relative disagreement between the recursive `Σ` and `Λ⁻¹`.
pub const RESYNC_TOLERANCE: f64 = 1e-8;

/// Gaussian prior on the arm means.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPrior {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    uninformative: bool,
}

impl GaussianPrior {
    /// Prior with mean `mean` and symmetric positive definite `covariance`.
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::Prior("prior needs at least one arm".into()));
        }
        if covariance.shape() != (n, n) {
            return Err(Error::Prior(format!(
                "covariance is {}x{} but the mean has {n} entries",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Prior("prior contains non-finite values".into()));
        }
        if covariance != covariance.transpose() {
            return Err(Error::Prior("covariance is not symmetric".into()));
        }
        if covariance.clone().cholesky().is_none() {
            return Err(Error::Prior("covariance is not positive definite".into()));
        }
        Ok(Self {
            mean: DVector::from_vec(mean),
            covariance,
            uninformative: false,
        })
    }

    /// Independent arms with a common prior variance.
    pub fn uncorrelated(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::Prior(format!(
                "prior variance must be positive and finite, got {variance}"
            )));
        }
        let n = mean.len();
        Self::new(mean, DMatrix::from_diagonal_element(n, n, variance))
    }

    /// The flat prior: zero precision at every arm.
    pub fn uninformative(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::Prior("prior needs at least one arm".into()));
        }
        Ok(Self {
            mean: DVector::zeros(arms),
            covariance: DMatrix::zeros(arms, arms),
            uninformative: true,
        })
    }

    pub fn arms(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Prior covariance; all zeros (and meaningless) for the flat prior.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn is_uninformative(&self) -> bool {
        self.uninformative
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.arms();
        (0..n).all(|i| (0..n).all(|j| i == j || self.covariance[(i, j)] == 0.0))
    }

    /// The common variance `σ₀²` of a diagonal prior, `None` otherwise.
    ///
    /// The flat prior reports `None` as well; callers treat it separately.
    pub fn common_variance(&self) -> Option<f64> {
        if self.uninformative || !self.is_diagonal() {
            return None;
        }
        let v = self.covariance[(0, 0)];
        (0..self.arms())
            .all(|i| self.covariance[(i, i)] == v)
            .then_some(v)
    }

    /// `δ² = σ_s² / σ₀²` for a diagonal prior with common variance; 0 for the flat prior.
    pub fn confidence(&self, sampling_variance: f64) -> Option<f64> {
        if self.uninformative {
            return Some(0.0);
        }
        self.common_variance().map(|v| sampling_variance / v)
    }

    /// `Λ₀ = Σ₀⁻¹`; the zero matrix for the flat prior.
    pub fn precision(&self) -> Result<DMatrix<f64>> {
        if self.uninformative {
            return Ok(DMatrix::zeros(self.arms(), self.arms()));
        }
        spd_inverse(&self.covariance)
    }
}

#[derive(Debug, Clone)]
enum Backing {
    /// Full covariance and precision.
    Dense {
        sigma: DMatrix<f64>,
        lambda: DMatrix<f64>,
    },
    /// Independent arms: per-arm precision, possibly zero.
    Diagonal { precision: Vec<f64> },
}

/// Result of re-solving `Σ` from `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resync {
    pub step: u64,
    /// `max |Σ_rec - Λ⁻¹| / max |Λ⁻¹|` before the recursive value was replaced.
    pub relative_drift: f64,
}

impl Resync {
    pub fn within_tolerance(&self) -> bool {
        self.relative_drift <= RESYNC_TOLERANCE
    }
}

/// Posterior over the arm means after `t` observations.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    sampling_variance: f64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    q: DVector<f64>,
    mu: DVector<f64>,
    backing: Backing,
    t: u64,
    last_resync: Option<Resync>,
}

impl PosteriorState {
    /// Initial state for `prior`.
    ///
    /// Diagonal and flat priors get the per-arm backing; anything with
    /// off-diagonal structure gets the dense one.
    pub fn new(prior: &GaussianPrior, sampling_variance: f64) -> Result<Self> {
        if prior.is_uninformative() || prior.is_diagonal() {
            Self::diagonal(prior, sampling_variance)
        } else {
            Self::dense(prior, sampling_variance)
        }
    }

    /// Initial state with full `Σ`/`Λ` matrices regardless of prior structure.
    pub fn dense(prior: &GaussianPrior, sampling_variance: f64) -> Result<Self> {
        check_sampling_variance(sampling_variance)?;
        if prior.is_uninformative() {
            return Err(Error::Prior(
                "the flat prior has no finite covariance; use the diagonal backing".into(),
            ));
        }
        let n = prior.arms();
        let sigma = prior.covariance().clone();
        let lambda = prior.precision()?;
        let q = &lambda * prior.mean();
        Ok(Self {
            sampling_variance,
            counts: vec![0; n],
            sums: vec![0.0; n],
            q,
            mu: prior.mean().clone(),
            backing: Backing::Dense { sigma, lambda },
            t: 0,
            last_resync: None,
        })
    }

    fn diagonal(prior: &GaussianPrior, sampling_variance: f64) -> Result<Self> {
        check_sampling_variance(sampling_variance)?;
        let n = prior.arms();
        let precision: Vec<f64> = if prior.is_uninformative() {
            vec![0.0; n]
        } else {
            (0..n).map(|i| 1.0 / prior.covariance()[(i, i)]).collect()
        };
        let q = DVector::from_iterator(n, (0..n).map(|i| precision[i] * prior.mean()[i]));
        Ok(Self {
            sampling_variance,
            counts: vec![0; n],
            sums: vec![0.0; n],
            q,
            mu: prior.mean().clone(),
            backing: Backing::Diagonal { precision },
            t: 0,
            last_resync: None,
        })
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn sampling_variance(&self) -> f64 {
        self.sampling_variance
    }

    /// Number of observations absorbed so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Average reward at each arm, 0 where the arm is unvisited.
    pub fn empirical_means(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(&self.sums)
            .map(|(&n, &s)| if n == 0 { 0.0 } else { s / n as f64 })
            .collect()
    }

    /// Posterior means; entries of unvisited arms under the flat prior are 0.
    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn information(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backing, Backing::Dense { .. })
    }

    /// Posterior variance of arm `i`; `None` means unbounded (flat prior, unvisited).
    pub fn variance(&self, i: usize) -> Option<f64> {
        match &self.backing {
            Backing::Dense { sigma, .. } => Some(sigma[(i, i)]),
            Backing::Diagonal { precision } => {
                (precision[i] > 0.0).then(|| 1.0 / precision[i])
            }
        }
    }

    /// Posterior covariance between arms `i` and `j`; `None` when unbounded.
    pub fn covariance_entry(&self, i: usize, j: usize) -> Option<f64> {
        match &self.backing {
            Backing::Dense { sigma, .. } => Some(sigma[(i, j)]),
            Backing::Diagonal { .. } if i == j => self.variance(i),
            Backing::Diagonal { .. } => Some(0.0),
        }
    }

    /// `Σ(t)`, or `None` while some variance is unbounded.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        match &self.backing {
            Backing::Dense { sigma, .. } => Some(sigma.clone()),
            Backing::Diagonal { precision } => {
                if precision.iter().any(|&p| p <= 0.0) {
                    return None;
                }
                let d = DVector::from_iterator(precision.len(), precision.iter().map(|p| 1.0 / p));
                Some(DMatrix::from_diagonal(&d))
            }
        }
    }

    /// `Λ(t)`.
    pub fn precision(&self) -> DMatrix<f64> {
        match &self.backing {
            Backing::Dense { lambda, .. } => lambda.clone(),
            Backing::Diagonal { precision } => {
                DMatrix::from_diagonal(&DVector::from_column_slice(precision))
            }
        }
    }

    pub fn last_resync(&self) -> Option<Resync> {
        self.last_resync
    }

    /// Absorbs one reward from `arm`.
    ///
    /// `q += r φ / σ_s²`, `Λ += φ φᵀ / σ_s²`, `Σ` by rank-1 downdate and
    /// `μ = Σ q`. Returns the re-solve report when this update hit a
    /// re-solve point.
    pub fn update(&mut self, arm: usize, reward: f64) -> Result<Option<Resync>> {
        check_arm(arm, self.arms())?;
        if !reward.is_finite() {
            return Err(Error::Numeric(format!("reward {reward} is not finite")));
        }
        let sv = self.sampling_variance;
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.q[arm] += reward / sv;
        self.t += 1;

        match &mut self.backing {
            Backing::Dense { sigma, lambda } => {
                lambda[(arm, arm)] += 1.0 / sv;
                rank1_downdate_in_place(sigma, arm, sv)?;
                self.mu = &*sigma * &self.q;
            }
            Backing::Diagonal { precision } => {
                precision[arm] += 1.0 / sv;
                self.mu[arm] = self.q[arm] / precision[arm];
            }
        }

        if self.is_dense() && self.t.is_multiple_of(RESYNC_INTERVAL) {
            return self.resync().map(Some);
        }
        Ok(None)
    }

    /// Replaces `Σ` by `Λ⁻¹` (Cholesky solve) and refreshes `μ`.
    ///
    /// A no-op returning zero drift for the diagonal backing, which is exact.
    pub fn resync(&mut self) -> Result<Resync> {
        let step = self.t;
        let report = match &mut self.backing {
            Backing::Dense { sigma, lambda } => {
                let solved = spd_inverse(lambda)?;
                let scale = solved.amax();
                let drift = (&*sigma - &solved).amax() / scale;
                *sigma = solved;
                self.mu = &*sigma * &self.q;
                Resync {
                    step,
                    relative_drift: drift,
                }
            }
            Backing::Diagonal { .. } => Resync {
                step,
                relative_drift: 0.0,
            },
        };
        self.last_resync = Some(report);
        Ok(report)
    }
}

/// Functional form of [`PosteriorState::update`].
pub fn information_update(state: &PosteriorState, arm: usize, reward: f64) -> Result<PosteriorState> {
    let mut next = state.clone();
    next.update(arm, reward)?;
    Ok(next)
}

/// Sherman-Morrison downdate for one observation of `arm`:
/// `Σ' = Σ - Σφφᵀ Σ / (σ_s² + φᵀΣφ)`, then symmetrized.
pub fn covariance_rank1_update(sigma: &DMatrix<f64>, arm: usize, sampling_variance: f64) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::Numeric("covariance must be square".into()));
    }
    check_arm(arm, sigma.nrows())?;
    check_sampling_variance(sampling_variance)?;
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("covariance has non-finite entries".into()));
    }
    let mut out = sigma.clone();
    rank1_downdate_in_place(&mut out, arm, sampling_variance)?;
    Ok(out)
}

fn rank1_downdate_in_place(sigma: &mut DMatrix<f64>, arm: usize, sampling_variance: f64) -> Result<()> {
    let col = sigma.column(arm).clone_owned();
    let denom = sampling_variance + col[arm];
    if !(denom.is_finite() && denom > 0.0) || col.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!(
            "rank-1 update at arm {arm} met a non-finite or non-positive pivot"
        )));
    }
    sigma.ger(-1.0 / denom, &col, &col, 1.0);
    let n = sigma.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = avg;
            sigma[(j, i)] = avg;
        }
    }
    Ok(())
}

/// Closed-form posterior from counts and empirical means:
/// `Λ = Λ₀ + P⁻¹`, `μ = Λ⁻¹ (P⁻¹ m̄ + Λ₀ μ₀)` with `P⁻¹ = diag(n_i / σ_s²)`.
pub fn batch_posterior(
    prior: &GaussianPrior,
    counts: &[u64],
    empirical_means: &[f64],
    sampling_variance: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = prior.arms();
    check_lengths(n, counts.len(), "counts")?;
    check_lengths(n, empirical_means.len(), "empirical means")?;
    check_sampling_variance(sampling_variance)?;

    let lambda0 = prior.precision()?;
    let info = data_precision(counts, sampling_variance);
    let lambda = &lambda0 + DMatrix::from_diagonal(&info);
    let mut rhs = &lambda0 * prior.mean();
    for i in 0..n {
        if counts[i] > 0 {
            rhs[i] += info[i] * empirical_means[i];
        }
    }
    let chol = lambda.clone().cholesky().ok_or_else(|| {
        Error::Numeric("posterior precision is singular (flat prior with an unvisited arm?)".into())
    })?;
    let mu = chol.solve(&rhs);
    Ok((mu, lambda))
}

/// Correlation row `ρ_i·` of the posterior and its Euclidean norm.
pub fn correlation_profile(state: &PosteriorState, arm: usize) -> Result<(DVector<f64>, f64)> {
    let n = state.arms();
    check_arm(arm, n)?;
    let var = |i: usize| -> Result<f64> {
        match state.variance(i) {
            Some(v) if v > 0.0 => Ok(v),
            _ => Err(Error::Numeric(format!("arm {i} has no finite positive variance"))),
        }
    };
    if !state.is_dense() {
        var(arm)?;
        let mut row = DVector::zeros(n);
        row[arm] = 1.0;
        return Ok((row, 1.0));
    }
    let si = var(arm)?.sqrt();
    let mut row = DVector::zeros(n);
    for j in 0..n {
        let cov = state.covariance_entry(arm, j).unwrap_or(0.0);
        row[j] = if j == arm { 1.0 } else { cov / (si * var(j)?.sqrt()) };
    }
    let norm = row.norm();
    Ok((row, norm))
}

/// `sqrt(Σ_j ρ_ij²)` for every arm; all ones for the diagonal backing.
pub(crate) fn correlation_norms(state: &PosteriorState) -> Vec<f64> {
    let n = state.arms();
    match &state.backing {
        Backing::Diagonal { .. } => vec![1.0; n],
        Backing::Dense { sigma, .. } => {
            let inv_var: Vec<f64> = (0..n).map(|i| 1.0 / sigma[(i, i)]).collect();
            (0..n)
                .map(|i| {
                    let col = sigma.column(i);
                    let s: f64 = (0..n).map(|j| col[j] * col[j] * inv_var[j]).sum();
                    (s * inv_var[i]).sqrt()
                })
                .collect()
        }
    }
}

/// Variance of arm `i` given the means of all other arms (Schur complement).
pub fn conditional_variance(sigma0: &DMatrix<f64>, arm: usize) -> Result<f64> {
    if !sigma0.is_square() {
        return Err(Error::Numeric("covariance must be square".into()));
    }
    let n = sigma0.nrows();
    check_arm(arm, n)?;
    let own = sigma0[(arm, arm)];
    if n == 1 {
        return Ok(own);
    }
    let rest = sigma0.clone().remove_row(arm).remove_column(arm);
    let cross = DVector::from_iterator(
        n - 1,
        (0..n).filter(|&j| j != arm).map(|j| sigma0[(arm, j)]),
    );
    let chol = rest.cholesky().ok_or_else(|| {
        Error::Numeric(format!("covariance without arm {arm} is singular"))
    })?;
    let explained = cross.dot(&chol.solve(&cross));
    let value = own - explained;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Numeric(format!(
            "conditional variance at arm {arm} is not positive ({value})"
        )))
    }
}

/// `δ²_{i-cond} = σ_s² / σ²_{i-cond}` for every arm.
pub fn conditional_confidences(prior: &GaussianPrior, sampling_variance: f64) -> Result<Vec<f64>> {
    if prior.is_uninformative() {
        return Ok(vec![0.0; prior.arms()]);
    }
    (0..prior.arms())
        .map(|i| conditional_variance(prior.covariance(), i).map(|v| sampling_variance / v))
        .collect()
}

/// Bias and covariance of the posterior mean as an estimator of the true means.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorMoments {
    pub bias: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// `e = (Λ₀+P⁻¹)⁻¹ Λ₀ (μ₀ - m)`, `Σ̄ = (Λ₀+P⁻¹)⁻¹ P⁻¹ (Λ₀+P⁻¹)⁻¹`.
pub fn estimator_moments(
    prior: &GaussianPrior,
    counts: &[u64],
    true_means: &[f64],
    sampling_variance: f64,
) -> Result<EstimatorMoments> {
    let n = prior.arms();
    check_lengths(n, counts.len(), "counts")?;
    check_lengths(n, true_means.len(), "true means")?;
    check_sampling_variance(sampling_variance)?;

    let lambda0 = prior.precision()?;
    let info = DMatrix::from_diagonal(&data_precision(counts, sampling_variance));
    let gain = spd_inverse(&(&lambda0 + &info))?;
    let error = prior.mean() - DVector::from_column_slice(true_means);
    let bias = &gain * (&lambda0 * error);
    let covariance = &gain * &info * &gain;
    Ok(EstimatorMoments { bias, covariance })
}

fn data_precision(counts: &[u64], sampling_variance: f64) -> DVector<f64> {
    DVector::from_iterator(counts.len(), counts.iter().map(|&c| c as f64 / sampling_variance))
}

pub(crate) fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}

fn check_sampling_variance(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "sampling variance must be positive and finite, got {v}"
        )))
    }
}

fn check_lengths(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{what} has {got} entries for {expected} arms"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn prior2() -> GaussianPrior {
        GaussianPrior::new(vec![0.0, 0.0], dmatrix![10.0, 5.0; 5.0, 10.0]).unwrap()
    }

    #[test]
    fn diagonal_prior_initial_state() {
        let prior = GaussianPrior::uncorrelated(vec![0.0; 4], 10.0).unwrap();
        let st = PosteriorState::dense(&prior, 10.0).unwrap();
        let lambda = st.precision();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.1 } else { 0.0 };
                assert_relative_eq!(lambda[(i, j)], want, epsilon = 1e-15);
            }
        }
        assert!(st.information().iter().all(|&x| x == 0.0));
        assert!(st.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn flat_prior_marks_every_arm_unbounded() {
        let prior = GaussianPrior::uninformative(3).unwrap();
        let st = PosteriorState::new(&prior, 10.0).unwrap();
        assert!((0..3).all(|i| st.variance(i).is_none()));
        assert!(st.covariance().is_none());
        assert!(PosteriorState::dense(&prior, 10.0).is_err());
    }

    #[test]
    fn two_by_two_precision() {
        let st = PosteriorState::new(&prior2(), 10.0).unwrap();
        assert!(st.is_dense());
        let l = st.precision();
        let want = dmatrix![10.0, -5.0; -5.0, 10.0] / 75.0;
        for (a, b) in l.iter().zip(want.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_priors() {
        assert!(GaussianPrior::new(vec![0.0, 0.0], dmatrix![1.0, 2.0; 2.0, 1.0]).is_err());
        assert!(GaussianPrior::new(vec![0.0, 0.0], dmatrix![1.0, 0.5; 0.4, 1.0]).is_err());
        assert!(GaussianPrior::new(vec![0.0], dmatrix![1.0, 0.0; 0.0, 1.0]).is_err());
        assert!(GaussianPrior::uncorrelated(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn single_arm_conjugate_update() {
        let prior = GaussianPrior::uncorrelated(vec![0.0], 10.0).unwrap();
        for mut st in [
            PosteriorState::new(&prior, 10.0).unwrap(),
            PosteriorState::dense(&prior, 10.0).unwrap(),
        ] {
            st.update(0, 10.0).unwrap();
            // (δ² μ₀ + n m̄) / (δ² + n) with δ² = 1
            assert_relative_eq!(st.mean()[0], 5.0, max_relative = 1e-12);
            assert_relative_eq!(st.variance(0).unwrap(), 5.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn reward_equal_to_mean_keeps_mean() {
        let prior = GaussianPrior::uncorrelated(vec![3.0, -2.0], 4.0).unwrap();
        let mut st = PosteriorState::dense(&prior, 2.0).unwrap();
        st.update(1, -2.0).unwrap();
        assert_relative_eq!(st.mean()[1], -2.0, max_relative = 1e-14);
        assert!(st.variance(1).unwrap() < 4.0);
        assert_eq!(st.variance(0).unwrap(), 4.0);
    }

    #[test]
    fn rank1_halves_matched_variance() {
        let sigma = DMatrix::from_diagonal_element(3, 3, 10.0);
        let out = covariance_rank1_update(&sigma, 1, 10.0).unwrap();
        assert_relative_eq!(out[(1, 1)], 5.0, max_relative = 1e-14);
        assert_eq!(out[(0, 0)], 10.0);
        assert_eq!(out[(2, 2)], 10.0);
        assert!(out.iter().enumerate().all(|(k, &x)| k % 4 == 0 || x == 0.0));
    }

    #[test]
    fn rank1_rejects_non_finite() {
        let mut sigma = DMatrix::from_diagonal_element(2, 2, 1.0);
        sigma[(0, 1)] = f64::NAN;
        assert!(matches!(
            covariance_rank1_update(&sigma, 0, 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(covariance_rank1_update(&sigma, 5, 1.0).is_err());
    }

    #[test]
    fn batch_without_data_is_prior() {
        let prior = prior2();
        let (mu, lambda) = batch_posterior(&prior, &[0, 0], &[0.0, 0.0], 10.0).unwrap();
        assert_eq!(mu, *prior.mean());
        let l0 = prior.precision().unwrap();
        for (a, b) in lambda.iter().zip(l0.iter()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn batch_diagonal_closed_form() {
        let mu0 = vec![1.0, 4.0, -3.0];
        let prior = GaussianPrior::uncorrelated(mu0.clone(), 5.0).unwrap();
        let sv = 10.0;
        let delta2 = sv / 5.0;
        let counts = [3, 0, 7];
        let means = [2.5, 0.0, -1.0];
        let (mu, _) = batch_posterior(&prior, &counts, &means, sv).unwrap();
        for i in 0..3 {
            let n = counts[i] as f64;
            let want = (delta2 * mu0[i] + n * means[i]) / (delta2 + n);
            assert_relative_eq!(mu[i], want, max_relative = 1e-12);
        }
    }

    #[test]
    fn flat_prior_batch_needs_every_arm() {
        let prior = GaussianPrior::uninformative(2).unwrap();
        assert!(batch_posterior(&prior, &[1, 0], &[1.0, 0.0], 1.0).is_err());
        let (mu, _) = batch_posterior(&prior, &[1, 2], &[1.0, 3.0], 1.0).unwrap();
        assert_relative_eq!(mu[1], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn correlation_of_two_by_two() {
        let st = PosteriorState::new(&prior2(), 10.0).unwrap();
        let (row, norm) = correlation_profile(&st, 0).unwrap();
        assert_relative_eq!(row[0], 1.0);
        assert_relative_eq!(row[1], 0.5, max_relative = 1e-12);
        assert_relative_eq!(norm, 1.25f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(norm, 1.1180, epsilon = 1e-4);
        let norms = correlation_norms(&st);
        assert_relative_eq!(norms[1], norm, max_relative = 1e-12);
    }

    #[test]
    fn correlation_of_diagonal_is_unit() {
        let prior = GaussianPrior::uncorrelated(vec![0.0; 3], 2.0).unwrap();
        for st in [
            PosteriorState::new(&prior, 1.0).unwrap(),
            PosteriorState::dense(&prior, 1.0).unwrap(),
        ] {
            let (row, norm) = correlation_profile(&st, 2).unwrap();
            assert_eq!(norm, 1.0);
            assert_eq!(row[2], 1.0);
        }
    }

    #[test]
    fn correlation_needs_finite_variance() {
        let st = PosteriorState::new(&GaussianPrior::uninformative(2).unwrap(), 1.0).unwrap();
        assert!(correlation_profile(&st, 0).is_err());
    }

    #[test]
    fn conditional_variance_cases() {
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 7.0]));
        assert_eq!(conditional_variance(&diag, 1).unwrap(), 7.0);
        let s = dmatrix![10.0, 5.0; 5.0, 10.0];
        assert_relative_eq!(conditional_variance(&s, 0).unwrap(), 7.5, max_relative = 1e-12);
        assert_eq!(conditional_variance(&dmatrix![4.0], 0).unwrap(), 4.0);
    }

    #[test]
    fn unbiased_prior_and_no_data_moments() {
        let prior = GaussianPrior::new(vec![1.0, 2.0], dmatrix![10.0, 5.0; 5.0, 10.0]).unwrap();
        let m = estimator_moments(&prior, &[4, 1], &[1.0, 2.0], 10.0).unwrap();
        assert!(m.bias.iter().all(|b| b.abs() < 1e-12));
        let m = estimator_moments(&prior, &[0, 0], &[5.0, -5.0], 10.0).unwrap();
        assert!(m.covariance.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn resync_drift_is_small() {
        let prior = prior2();
        let mut st = PosteriorState::new(&prior, 10.0).unwrap();
        let mut hits = 0;
        for k in 0..600u64 {
            if let Some(r) = st.update((k % 2) as usize, k as f64 * 0.01).unwrap() {
                assert!(r.within_tolerance(), "{r:?}");
                hits += 1;
            }
        }
        assert_eq!(hits, 2);
        assert_eq!(st.last_resync().unwrap().step, 512);
    }
}
