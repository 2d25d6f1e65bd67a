//! JSON experiment configuration.
//!
//! Every block is optional and falls back to the well-informed correlated
//! scenario on the default 10×10 surface. Unknown keys are rejected, and
//! every error names the offending key path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundParams;
use crate::env::{exponential_kernel, make_grid_surface, BanditInstance, Coord, RewardSurfaceSpec};
use crate::error::{Error, Result};
use crate::inference::GaussianPrior;
use crate::policy::{default_k, PolicyParams, Variant};
use crate::sim::Experiment;

/// Prior mean specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorMean {
    /// The same value at every arm.
    Uniform(f64),
    /// `high` on arms inside a patch that lies above the base value, `low` elsewhere.
    PatchAligned { high: f64, low: f64 },
    /// One value per arm.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub variant: Variant,
    pub mean: PriorMean,
    pub sigma0_sq: f64,
    pub length_scale: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Correlated,
            mean: PriorMean::PatchAligned { high: 100.0, low: 0.0 },
            sigma0_sq: 10.0,
            length_scale: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(rename = "K")]
    pub k: f64,
    pub a: f64,
    pub nu: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            a: 1.0,
            nu: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub epsilon: f64,
    pub a: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0 / 10f64.sqrt(),
            a: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: u64,
    pub runs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 5000,
            runs: 100,
            seed: 42,
        }
    }
}

/// Complete experiment description.
///
/// Arms come from `means` (with optional `coords`) when given, otherwise
/// from `surface`, which defaults to the stock 10×10 surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<RewardSurfaceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Coord>>,
    pub sampling_variance: f64,
    pub prior: PriorConfig,
    pub policy: PolicyConfig,
    pub bound: BoundConfig,
    pub run: RunConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            surface: None,
            means: None,
            coords: None,
            sampling_variance: 10.0,
            prior: PriorConfig::default(),
            policy: PolicyConfig::default(),
            bound: BoundConfig::default(),
            run: RunConfig::default(),
        }
    }
}

/// The prior scenarios of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Mean 100 on the high-reward region and 0 elsewhere, kernel length 2.
    WellInformed,
    /// Mean 30 everywhere, kernel length 4.
    IllInformed,
    /// Flat prior.
    Uninformative,
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {value}")))
    }
}

impl ExperimentConfig {
    /// Parses and validates JSON text.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { "<root>".to_string() } else { path };
            Error::config(key, e.inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces the prior block with one of the stock scenarios. The variant
    /// is kept unless the preset is `Uninformative`.
    pub fn apply_preset(&mut self, preset: Preset) {
        let variant = self.prior.variant;
        self.prior = match preset {
            Preset::WellInformed => PriorConfig {
                variant,
                ..PriorConfig::default()
            },
            Preset::IllInformed => PriorConfig {
                variant,
                mean: PriorMean::Uniform(30.0),
                sigma0_sq: 10.0,
                length_scale: 4.0,
            },
            Preset::Uninformative => PriorConfig {
                variant: Variant::Uninformative,
                ..PriorConfig::default()
            },
        };
    }

    pub fn validate(&self) -> Result<()> {
        positive("sampling_variance", self.sampling_variance)?;
        positive("prior.sigma0_sq", self.prior.sigma0_sq)?;
        positive("prior.length_scale", self.prior.length_scale)?;
        positive("policy.K", self.policy.k)?;
        positive("policy.a", self.policy.a)?;
        if !(self.policy.nu > 0.0 && self.policy.nu <= 1.0) {
            return Err(Error::config("policy.nu", format!("must lie in (0, 1], got {}", self.policy.nu)));
        }
        if !(self.bound.epsilon > 0.0 && self.bound.epsilon < 1.0) {
            return Err(Error::config(
                "bound.epsilon",
                format!("must lie in (0, 1), got {}", self.bound.epsilon),
            ));
        }
        positive("bound.a", self.bound.a)?;
        if self.run.horizon == 0 {
            return Err(Error::config("run.horizon", "must be at least 1"));
        }
        if self.run.runs == 0 {
            return Err(Error::config("run.runs", "must be at least 1"));
        }
        if self.means.is_some() && self.surface.is_some() {
            return Err(Error::config("means", "give either `means` or `surface`, not both"));
        }
        if self.means.is_none() && self.coords.is_some() {
            return Err(Error::config("coords", "`coords` goes with explicit `means`"));
        }
        if let Some(surface) = &self.surface {
            surface.validate().map_err(|e| Error::config("surface", e.to_string()))?;
        }
        let arms = self.arms();
        if let Some(coords) = &self.coords {
            if coords.len() != arms {
                return Err(Error::config(
                    "coords",
                    format!("{} coordinates for {arms} arms", coords.len()),
                ));
            }
        }
        match &self.prior.mean {
            PriorMean::Values(v) if v.len() != arms => Err(Error::config(
                "prior.mean.values",
                format!("{} values for {arms} arms", v.len()),
            )),
            PriorMean::Values(v) if v.iter().any(|x| !x.is_finite()) => {
                Err(Error::config("prior.mean.values", "values must be finite"))
            }
            PriorMean::PatchAligned { .. } if self.means.is_some() => Err(Error::config(
                "prior.mean.patch_aligned",
                "needs a surface; give `values` with explicit means",
            )),
            _ => Ok(()),
        }
    }

    fn arms(&self) -> usize {
        match &self.means {
            Some(m) => m.len(),
            None => self.surface_spec().arms(),
        }
    }

    /// The surface in use when `means` is absent.
    pub fn surface_spec(&self) -> RewardSurfaceSpec {
        self.surface.clone().unwrap_or_default()
    }

    pub fn instance(&self) -> Result<BanditInstance> {
        let wrap = |key: &'static str| move |e: Error| Error::config(key, e.to_string());
        match &self.means {
            Some(means) => {
                let inst = BanditInstance::new(means.clone(), self.sampling_variance).map_err(wrap("means"))?;
                match &self.coords {
                    Some(c) => inst.with_coords(c.clone()).map_err(wrap("coords")),
                    None => Ok(inst),
                }
            }
            None => make_grid_surface(&self.surface_spec(), self.sampling_variance).map_err(wrap("surface")),
        }
    }

    /// Prior mean vector `μ₀`.
    pub fn prior_mean(&self) -> Result<Vec<f64>> {
        let arms = self.arms();
        Ok(match &self.prior.mean {
            PriorMean::Uniform(v) => vec![*v; arms],
            PriorMean::Values(v) => v.clone(),
            PriorMean::PatchAligned { high, low } => {
                let spec = self.surface_spec();
                spec.coords()
                    .into_iter()
                    .map(|c| match spec.patch_at(c) {
                        Some(k) if spec.patches[k].value > spec.base_value => *high,
                        _ => *low,
                    })
                    .collect()
            }
        })
    }

    pub fn prior(&self) -> Result<GaussianPrior> {
        let instance = self.instance()?;
        let wrap = |e: Error| Error::config("prior", e.to_string());
        match self.prior.variant {
            Variant::Uninformative => GaussianPrior::uninformative(instance.arms()).map_err(wrap),
            Variant::Uncorrelated => GaussianPrior::uncorrelated(self.prior_mean()?, self.prior.sigma0_sq).map_err(wrap),
            Variant::Correlated => {
                let coords = instance.coords().ok_or_else(|| {
                    Error::config("coords", "the correlated prior needs arm coordinates")
                })?;
                let cov = exponential_kernel(coords, self.prior.sigma0_sq, self.prior.length_scale)
                    .map_err(|e| Error::config("prior.length_scale", e.to_string()))?;
                GaussianPrior::new(self.prior_mean()?, cov).map_err(wrap)
            }
        }
    }

    pub fn policy_params(&self) -> Result<PolicyParams> {
        PolicyParams::new(self.policy.k, self.policy.a, self.policy.nu, self.prior.variant)
            .map_err(|e| Error::config("policy", e.to_string()))
    }

    /// Bound constants; `K` is shared with the policy.
    pub fn bound_params(&self) -> Result<BoundParams> {
        BoundParams::new(self.bound.epsilon, self.bound.a, self.policy.k)
            .map_err(|e| Error::config("bound", e.to_string()))
    }

    pub fn experiment(&self) -> Result<Experiment> {
        let experiment = Experiment {
            instance: self.instance()?,
            prior: self.prior()?,
            params: self.policy_params()?,
            horizon: self.run.horizon,
            runs: self.run.runs,
            seed: self.run.seed,
        };
        experiment.validate()?;
        Ok(experiment)
    }
}
