use serde::{Deserialize, Serialize};

use crate::bounds::BoundParams;
use crate::distributions::{ComponentSpec, GaussianMixture, MixtureSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the perturbed law is built from the base law and a scale `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation<S> {
    /// `X + h e_1`.
    Translate,
    /// `(1 + h) X`.
    Scale,
    /// `(1 - h) base + h partner`.
    MixtureWeight { partner: MixtureSpec<S> },
    /// Both laws smoothed by `N(0, σ² I)`: the reference is `base + θ`, the
    /// perturbed law is `((1 - h) base + h contaminant) + θ`.
    SmoothedSequence { contaminant: MixtureSpec<S>, smoothing: S },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<S> {
    pub name: String,
    pub base: MixtureSpec<S>,
    pub perturbation: Perturbation<S>,
    /// Perturbation scales, strictly positive and strictly descending.
    pub h: Vec<S>,
    pub params: BoundParams<S>,
    /// Derivative multi-index for the pointwise certificate (zeros by default).
    #[serde(default)]
    pub alpha: Option<Vec<usize>>,
    /// Seed for sampled transport when `d > 1`.
    #[serde(default)]
    pub seed: u64,
    /// Rate `r` of the exponential-moment constant; defaults to 1.
    #[serde(default)]
    pub exp_rate: Option<S>,
}

/// Names accepted by [`Scenario::preset`].
pub const PRESETS: [&str; 4] = ["gaussian-translate", "gaussian-scale", "mixture-weight", "smoothed-sequence"];

fn normal_spec<S: Scalar>(mean: f64, var: f64) -> ComponentSpec<S> {
    ComponentSpec { w: S::one(), mean: vec![S::lit(mean)], cov: vec![vec![S::lit(var)]] }
}

fn single<S: Scalar>(mean: f64, var: f64) -> MixtureSpec<S> {
    MixtureSpec { d: 1, components: vec![normal_spec(mean, var)] }
}

impl<S: Scalar> Scenario<S> {
    /// Built-in one-dimensional scenarios with `p = q = 2`, `ε = 0.1`.
    pub fn preset(name: &str) -> Result<Self> {
        let half = S::lit(0.5);
        let (base, perturbation) = match name {
            "gaussian-translate" => (single(0.0, 1.0), Perturbation::Translate),
            "gaussian-scale" => (single(0.0, 1.0), Perturbation::Scale),
            "mixture-weight" => {
                let base = MixtureSpec {
                    d: 1,
                    components: vec![
                        ComponentSpec { w: half, ..normal_spec(-1.0, 1.0) },
                        ComponentSpec { w: half, ..normal_spec(1.0, 1.0) },
                    ],
                };
                (base, Perturbation::MixtureWeight { partner: single(2.0, 0.5) })
            }
            "smoothed-sequence" => (
                single(0.0, 1.0),
                Perturbation::SmoothedSequence { contaminant: single(3.0, 0.0025), smoothing: S::one() },
            ),
            other => return Err(Error::param(format!("unknown scenario preset {other:?}; known: {PRESETS:?}"))),
        };
        let scenario = Scenario {
            name: name.to_string(),
            base,
            perturbation,
            h: [0.1, 1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&v| S::lit(v)).collect(),
            params: BoundParams::new(S::lit(2.0), S::lit(2.0), S::lit(0.1), 1)?,
            alpha: None,
            seed: 0,
            exp_rate: None,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Self = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::param("scenario name is empty"));
        }
        self.params.validate()?;
        if self.base.d != self.params.d {
            return Err(Error::DimensionMismatch { expected: self.params.d, found: self.base.d });
        }
        if self.h.is_empty() {
            return Err(Error::param("scale grid is empty"));
        }
        if let Some(bad) = self.h.iter().find(|h| !(**h > S::zero()) || !h.is_finite()) {
            return Err(Error::param(format!("scales must be positive and finite, got {bad}")));
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("scales must be strictly descending"));
        }
        if let Some(alpha) = &self.alpha {
            if alpha.len() != self.params.d {
                return Err(Error::DimensionMismatch { expected: self.params.d, found: alpha.len() });
            }
        }
        if let Some(r) = self.exp_rate {
            if !(r > S::zero()) {
                return Err(Error::param("exponential-moment rate must be positive"));
            }
        }
        match &self.perturbation {
            Perturbation::MixtureWeight { .. } => {
                if self.h.iter().any(|h| *h > S::one()) {
                    return Err(Error::param("mixture weights must not exceed 1"));
                }
            }
            Perturbation::SmoothedSequence { smoothing, .. } => {
                if self.h.iter().any(|h| *h > S::one()) {
                    return Err(Error::param("contamination weights must not exceed 1"));
                }
                if !(*smoothing > S::zero()) {
                    return Err(Error::param("smoothing scale must be positive"));
                }
            }
            _ => {}
        }
        GaussianMixture::from_spec(&self.base)?;
        Ok(())
    }

    pub fn alpha(&self) -> Vec<usize> {
        self.alpha.clone().unwrap_or_else(|| vec![0; self.params.d])
    }

    /// The unperturbed law every row is compared against.
    pub fn reference(&self) -> Result<GaussianMixture<S>> {
        let base = GaussianMixture::from_spec(&self.base)?;
        match &self.perturbation {
            Perturbation::SmoothedSequence { smoothing, .. } => base.smooth(*smoothing),
            _ => Ok(base),
        }
    }

    /// The law at scale `h`.
    pub fn perturbed(&self, h: S) -> Result<GaussianMixture<S>> {
        let base = GaussianMixture::from_spec(&self.base)?;
        match &self.perturbation {
            Perturbation::Translate => {
                let mut shift = vec![S::zero(); base.dim()];
                shift[0] = h;
                base.translated(&shift)
            }
            Perturbation::Scale => base.scaled(S::one() + h),
            Perturbation::MixtureWeight { partner } => base.blend(&GaussianMixture::from_spec(partner)?, h),
            Perturbation::SmoothedSequence { contaminant, smoothing } => {
                base.blend(&GaussianMixture::from_spec(contaminant)?, h)?.smooth(*smoothing)
            }
        }
    }
}
