//! Upper-credible-limit arm selection.
//!
//! The UCL index of arm `i` at step `t` is the `1 - α_t` posterior quantile,
//! `μ_i + σ_i Φ⁻¹(1 - α_t)` with `α_t = 1 / (K t^a)`. The correlated variant
//! widens the credible interval by the norm of the arm's correlation row and
//! runs an initialization phase that samples high-variance arms first.

pub mod quantile;

use std::cmp::Ordering;
use std::f64::consts::{E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_arm, Error, Result};
use crate::inference::{correlation_norms, correlation_profile, PosteriorState};
pub use quantile::{inv_norm_cdf, norm_cdf, norm_pdf, norm_sf, upper_quantile};

/// `K = √(2πe)`, the default credibility scale.
pub fn default_k() -> f64 {
    (2.0 * PI * E).sqrt()
}

/// Which prior family, and hence which index, a policy runs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Uninformative,
    Uncorrelated,
    Correlated,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Uninformative => "uninformative",
            Variant::Uncorrelated => "uncorrelated",
            Variant::Correlated => "correlated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    pub k: f64,
    pub a: f64,
    pub nu: f64,
    pub variant: Variant,
}

impl PolicyParams {
    pub fn new(k: f64, a: f64, nu: f64, variant: Variant) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Parameter(format!("K must be positive, got {k}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("a must be positive, got {a}")));
        }
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::Parameter(format!("nu must lie in (0, 1], got {nu}")));
        }
        Ok(Self { k, a, nu, variant })
    }

    /// `K = √(2πe)`, `a = 1`, `ν = 1`.
    pub fn standard(variant: Variant) -> Self {
        Self {
            k: default_k(),
            a: 1.0,
            nu: 1.0,
            variant,
        }
    }

    /// `α_t = min(1 / (K t^a), 0.5)`.
    pub fn alpha(&self, t: u64) -> f64 {
        (1.0 / (self.k * (t as f64).powf(self.a))).min(0.5)
    }

    /// `Φ⁻¹(1 - α_t)`.
    pub fn multiplier(&self, t: u64) -> Result<f64> {
        check_step(t)?;
        upper_quantile(self.alpha(t))
    }
}

/// A UCL index; `Unbounded` ranks above every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Index {
    Unbounded,
    Finite(f64),
}

impl Index {
    pub fn value(self) -> Option<f64> {
        match self {
            Index::Finite(v) => Some(v),
            Index::Unbounded => None,
        }
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Index::Unbounded, Index::Unbounded) => Some(Ordering::Equal),
            (Index::Unbounded, Index::Finite(_)) => Some(Ordering::Greater),
            (Index::Finite(_), Index::Unbounded) => Some(Ordering::Less),
            (Index::Finite(a), Index::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Unbounded => f.write_str("inf"),
            Index::Finite(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initialization,
    Ucb,
}

/// One selection with the indices it was made from.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub arm: usize,
    pub indices: Vec<Index>,
    pub phase: Phase,
}

/// UCL index for the uninformative and uncorrelated variants.
pub fn ucl_index(state: &PosteriorState, arm: usize, t: u64, params: &PolicyParams) -> Result<Index> {
    if params.variant == Variant::Correlated {
        return Err(Error::Parameter(
            "the plain UCL index is for uninformative or uncorrelated priors".into(),
        ));
    }
    check_arm(arm, state.arms())?;
    let z = params.multiplier(t)?;
    Ok(match state.variance(arm) {
        None => Index::Unbounded,
        Some(v) => Index::Finite(state.mean()[arm] + v.sqrt() * z),
    })
}

/// Correlated UCL index `μ_i + σ_i ‖ρ_i·‖ Φ⁻¹(1 - α_t)`.
pub fn correlated_ucl_index(
    state: &PosteriorState,
    arm: usize,
    t: u64,
    params: &PolicyParams,
) -> Result<Index> {
    if params.variant != Variant::Correlated {
        return Err(Error::Parameter("the correlated index needs the correlated variant".into()));
    }
    let z = params.multiplier(t)?;
    let (_, rho_norm) = correlation_profile(state, arm)?;
    let sd = state.variance(arm).unwrap_or(f64::NAN).sqrt();
    Ok(Index::Finite(state.mean()[arm] + sd * rho_norm * z))
}

/// Indices of every arm at step `t`.
pub fn indices(state: &PosteriorState, t: u64, params: &PolicyParams) -> Result<Vec<Index>> {
    let z = params.multiplier(t)?;
    let n = state.arms();
    let mu = state.mean();
    let widen = match params.variant {
        Variant::Correlated => {
            if (0..n).any(|i| state.variance(i).is_none()) {
                return Err(Error::Parameter(
                    "the correlated index needs finite prior variances".into(),
                ));
            }
            correlation_norms(state)
        }
        _ => vec![1.0; n],
    };
    Ok((0..n)
        .map(|i| match state.variance(i) {
            None => Index::Unbounded,
            Some(v) => Index::Finite(mu[i] + v.sqrt() * widen[i] * z),
        })
        .collect())
}

/// Arm to sample during the initialization phase, `None` once it is over.
///
/// Picks the largest variance among arms whose variance still exceeds
/// `σ_s² / ν`, lowest index on ties.
pub fn initialization_step(state: &PosteriorState, params: &PolicyParams) -> Result<Option<usize>> {
    if params.variant != Variant::Correlated {
        return Err(Error::Parameter(
            "the initialization phase belongs to the correlated variant".into(),
        ));
    }
    let threshold = state.sampling_variance() / params.nu;
    let mut best: Option<(usize, Index)> = None;
    for i in 0..state.arms() {
        let v = match state.variance(i) {
            None => Index::Unbounded,
            Some(v) if v > threshold => Index::Finite(v),
            Some(_) => continue,
        };
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    Ok(best.map(|(i, _)| i))
}

/// Chooses the arm for step `t`.
pub fn select_arm(state: &PosteriorState, t: u64, params: &PolicyParams) -> Result<Decision> {
    check_step(t)?;
    let indices = indices(state, t, params)?;
    if params.variant == Variant::Correlated {
        if let Some(arm) = initialization_step(state, params)? {
            return Ok(Decision {
                arm,
                indices,
                phase: Phase::Initialization,
            });
        }
    }
    let arm = argmax(&indices);
    Ok(Decision {
        arm,
        indices,
        phase: Phase::Ucb,
    })
}

/// First position of the largest index.
pub fn argmax(indices: &[Index]) -> usize {
    let mut best = 0;
    for (i, idx) in indices.iter().enumerate().skip(1) {
        if *idx > indices[best] {
            best = i;
        }
    }
    best
}

fn check_step(t: u64) -> Result<()> {
    if t == 0 {
        Err(Error::Parameter("steps are numbered from 1".into()))
    } else {
        Ok(())
    }
}
