//! Bandit instances, spatial reward surfaces and the exponential kernel.
//!
//! An instance is a vector of true arm means plus a common sampling
//! variance. Arms may carry a position on a 2-D grid, which is what the
//! spatial priors in [`crate::inference`] are built from.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_arm, Error, Result};

/// Position of an arm in the embedding plane, `[row, col]` in grid units.
pub type Coord = [f64; 2];

/// Diagonal jitter, relative to the prior variance, used to repair kernels
/// that come out numerically semi-definite.
pub const KERNEL_JITTER: f64 = 1e-8;

/// Smallest eigenvalue, relative to the prior variance, a repaired kernel must have.
pub const KERNEL_MIN_EIGENVALUE: f64 = 1e-10;

/// A stationary Gaussian bandit.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    sampling_variance: f64,
    coords: Option<Vec<Coord>>,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, sampling_variance: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidSpec("a bandit needs at least one arm".into()));
        }
        if let Some(bad) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidSpec(format!("mean of arm {bad} is not finite")));
        }
        if !(sampling_variance > 0.0 && sampling_variance.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "sampling variance must be positive and finite, got {sampling_variance}"
            )));
        }
        Ok(Self {
            means,
            sampling_variance,
            coords: None,
        })
    }

    /// Attaches a spatial layout; one distinct coordinate per arm.
    pub fn with_coords(mut self, coords: Vec<Coord>) -> Result<Self> {
        if coords.len() != self.means.len() {
            return Err(Error::InvalidSpec(format!(
                "{} coordinates given for {} arms",
                coords.len(),
                self.means.len()
            )));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("coordinates must be finite".into()));
        }
        for (i, a) in coords.iter().enumerate() {
            if let Some(j) = coords[..i].iter().position(|b| b == a) {
                return Err(Error::InvalidSpec(format!(
                    "arms {j} and {i} share the coordinate {a:?}"
                )));
            }
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn sampling_variance(&self) -> f64 {
        self.sampling_variance
    }

    pub fn coords(&self) -> Option<&[Coord]> {
        self.coords.as_deref()
    }

    /// Largest mean.
    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-indexed arm attaining the largest mean.
    pub fn best_arm(&self) -> usize {
        let best = self.best_mean();
        self.means.iter().position(|&m| m == best).unwrap_or(0)
    }

    /// The optimal arm if exactly one arm attains the largest mean.
    pub fn unique_best_arm(&self) -> Option<usize> {
        let best = self.best_mean();
        let mut maximizers = self.means.iter().enumerate().filter(|(_, &m)| m == best);
        let first = maximizers.next().map(|(i, _)| i);
        match maximizers.next() {
            Some(_) => None,
            None => first,
        }
    }

    /// Gap `best_mean - mean(arm)`, the regret of one pull of `arm`.
    pub fn gap(&self, arm: usize) -> f64 {
        self.best_mean() - self.means[arm]
    }

    pub fn gaps(&self) -> Vec<f64> {
        let best = self.best_mean();
        self.means.iter().map(|m| best - m).collect()
    }
}

/// A constant-valued disc on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Patch {
    pub center: Coord,
    pub radius: f64,
    pub value: f64,
}

/// Rectangular grid of arms with a base reward and a list of patches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSurfaceSpec {
    pub rows: usize,
    pub cols: usize,
    pub base_value: f64,
    #[serde(default)]
    pub patches: Vec<Patch>,
}

impl Default for RewardSurfaceSpec {
    /// 10×10 grid at 30 with a high patch at (2, 2) and a low patch at (7, 7).
    ///
    /// The high patch is a stepped hill so that the best arm is unique:
    /// 60 at the peak, 50 on the ring at distance 1 and 40 out to 2.5.
    fn default() -> Self {
        let hill = |radius, value| Patch {
            center: [2.0, 2.0],
            radius,
            value,
        };
        let valley = |radius, value| Patch {
            center: [7.0, 7.0],
            radius,
            value,
        };
        Self {
            rows: 10,
            cols: 10,
            base_value: 30.0,
            patches: vec![
                hill(0.5, 60.0),
                hill(1.5, 50.0),
                hill(2.5, 40.0),
                valley(0.5, 5.0),
                valley(1.5, 15.0),
            ],
        }
    }
}

impl RewardSurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidSpec(format!(
                "grid {}x{} has zero area",
                self.rows, self.cols
            )));
        }
        if !self.base_value.is_finite() {
            return Err(Error::InvalidSpec("base value must be finite".into()));
        }
        for (k, p) in self.patches.iter().enumerate() {
            if !(p.radius > 0.0 && p.radius.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "patch {k} radius must be positive, got {}",
                    p.radius
                )));
            }
            if !p.value.is_finite() || p.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSpec(format!("patch {k} is not finite")));
            }
        }
        Ok(())
    }

    pub fn arms(&self) -> usize {
        self.rows * self.cols
    }

    /// Cell coordinates in row-major order.
    pub fn coords(&self) -> Vec<Coord> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| [r as f64, c as f64]))
            .collect()
    }

    /// Patch governing `cell`: among the patches containing it, the one with
    /// the nearest center, ties going to the earlier patch.
    pub fn patch_at(&self, cell: Coord) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, p) in self.patches.iter().enumerate() {
            let d = distance(cell, p.center);
            if d <= p.radius && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        best.map(|(k, _)| k)
    }

    pub fn value_at(&self, cell: Coord) -> f64 {
        self.patch_at(cell)
            .map_or(self.base_value, |k| self.patches[k].value)
    }
}

/// Builds the grid bandit described by `spec`, arms in row-major order.
pub fn make_grid_surface(spec: &RewardSurfaceSpec, sampling_variance: f64) -> Result<BanditInstance> {
    spec.validate()?;
    let coords = spec.coords();
    let means = coords.iter().map(|&c| spec.value_at(c)).collect();
    BanditInstance::new(means, sampling_variance)?.with_coords(coords)
}

/// Draws one reward from `Normal(mean(arm), sampling_variance)`.
pub fn sample_reward<R: Rng + ?Sized>(
    instance: &BanditInstance,
    arm: usize,
    rng: &mut R,
) -> Result<f64> {
    check_arm(arm, instance.arms())?;
    let normal = Normal::new(instance.mean(arm), instance.sampling_variance().sqrt())
        .map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(normal.sample(rng))
}

pub fn distance(a: Coord, b: Coord) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Exponential (Laplacian) kernel `v * exp(-d / l)` over Euclidean distances.
///
/// If the matrix is numerically semi-definite its diagonal is lifted by
/// [`KERNEL_JITTER`]` * v` until the smallest eigenvalue reaches
/// [`KERNEL_MIN_EIGENVALUE`]` * v`.
pub fn exponential_kernel(coords: &[Coord], prior_variance: f64, length_scale: f64) -> Result<DMatrix<f64>> {
    if !(prior_variance > 0.0 && prior_variance.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "prior variance must be positive and finite, got {prior_variance}"
        )));
    }
    if !(length_scale > 0.0 && length_scale.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "length scale must be positive and finite, got {length_scale}"
        )));
    }
    if coords.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidSpec("coordinates must be finite".into()));
    }
    let n = coords.len();
    let mut kernel = DMatrix::from_fn(n, n, |i, j| {
        prior_variance * (-distance(coords[i], coords[j]) / length_scale).exp()
    });

    let floor = KERNEL_MIN_EIGENVALUE * prior_variance;
    let mut jitter = KERNEL_JITTER * prior_variance;
    while min_eigenvalue(&kernel) < floor {
        for i in 0..n {
            kernel[(i, i)] += jitter;
        }
        jitter *= 10.0;
    }
    Ok(kernel)
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
