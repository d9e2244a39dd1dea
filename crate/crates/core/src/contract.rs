//! Contracts shared by learners, environments and the combiners.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Claimed anytime regret envelope `coefficient * t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PutativeBound {
    coefficient: f64,
    exponent: f64,
}

impl PutativeBound {
    pub fn new(coefficient: f64, exponent: f64) -> Result<Self> {
        if !coefficient.is_finite() || coefficient < 0.0 {
            return Err(Error::invalid(format!(
                "regret coefficient must be finite and >= 0, got {coefficient}"
            )));
        }
        if !(0.5..=1.0).contains(&exponent) {
            return Err(Error::invalid(format!(
                "regret exponent must lie in [0.5, 1], got {exponent}"
            )));
        }
        Ok(Self {
            coefficient,
            exponent,
        })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `C * t^alpha`.
    pub fn at(&self, t: f64) -> f64 {
        self.coefficient * t.powf(self.exponent)
    }
}

/// What a learner sees before acting: the number of arms and, for linear
/// environments, a `dim x arms` feature matrix (one column per arm).
///
/// Features are reference counted so fixed-context environments hand out the
/// same allocation every round; learners use pointer identity to keep caches.
#[derive(Debug, Clone)]
pub struct Context {
    arms: usize,
    features: Option<Arc<DMatrix<f64>>>,
}

impl Context {
    /// Context-free K-armed round.
    pub fn token(arms: usize) -> Self {
        Self {
            arms,
            features: None,
        }
    }

    pub fn with_features(features: Arc<DMatrix<f64>>) -> Self {
        Self {
            arms: features.ncols(),
            features: Some(features),
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn features(&self) -> Option<&Arc<DMatrix<f64>>> {
        self.features.as_ref()
    }

    pub fn dim(&self) -> Option<usize> {
        self.features.as_ref().map(|f| f.nrows())
    }

    pub fn feature(&self, arm: usize) -> Option<DVectorView<'_, f64>> {
        self.features
            .as_ref()
            .filter(|f| arm < f.ncols())
            .map(|f| f.column(arm))
    }

    pub(crate) fn require_features(&self) -> Result<&Arc<DMatrix<f64>>> {
        self.features
            .as_ref()
            .ok_or_else(|| Error::invalid("learner needs feature vectors but context has none"))
    }

    pub(crate) fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < self.arms {
            Ok(())
        } else {
            Err(Error::InvalidArm {
                arm,
                arms: self.arms,
            })
        }
    }
}

/// A bandit learner driven one round at a time.
///
/// Implementations must be deterministic given their construction and the
/// feedback history: replaying the same history yields the same proposals.
pub trait BaseAlgorithm: Send {
    fn propose(&mut self, context: &Context) -> Result<usize>;

    fn feedback(&mut self, context: &Context, action: usize, reward: f64) -> Result<()>;

    /// Forget all feedback.
    fn reset(&mut self);

    fn name(&self) -> String;
}

impl<B: BaseAlgorithm + ?Sized> BaseAlgorithm for Box<B> {
    fn propose(&mut self, context: &Context) -> Result<usize> {
        (**self).propose(context)
    }

    fn feedback(&mut self, context: &Context, action: usize, reward: f64) -> Result<()> {
        (**self).feedback(context, action, reward)
    }

    fn reset(&mut self) {
        (**self).reset()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Stochastic environment with an exactly known mean reward function.
pub trait Environment: Send {
    fn arms(&self) -> usize;

    fn draw_context(&mut self, rng: &mut SimRng) -> Context;

    /// Noisy observation for playing `action` in `context`.
    fn reward(&self, context: &Context, action: usize, rng: &mut SimRng) -> Result<f64>;

    /// Mean of [`Environment::reward`] over the noise.
    fn expected_reward(&self, context: &Context, action: usize) -> Result<f64>;

    /// Maximum of [`Environment::expected_reward`] over actions.
    fn optimal_expected_reward(&self, context: &Context) -> f64;

    fn describe(&self) -> EnvDescription;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn arms(&self) -> usize {
        (**self).arms()
    }

    fn draw_context(&mut self, rng: &mut SimRng) -> Context {
        (**self).draw_context(rng)
    }

    fn reward(&self, context: &Context, action: usize, rng: &mut SimRng) -> Result<f64> {
        (**self).reward(context, action, rng)
    }

    fn expected_reward(&self, context: &Context, action: usize) -> Result<f64> {
        (**self).expected_reward(context, action)
    }

    fn optimal_expected_reward(&self, context: &Context) -> f64 {
        (**self).optimal_expected_reward(context)
    }

    fn describe(&self) -> EnvDescription {
        (**self).describe()
    }
}

/// Provenance record for an environment instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvDescription {
    pub kind: String,
    pub arms: usize,
    pub dim: Option<usize>,
    pub params: BTreeMap<String, f64>,
}

impl EnvDescription {
    pub fn new(kind: &str, arms: usize, dim: Option<usize>) -> Self {
        Self {
            kind: kind.to_string(),
            arms,
            dim,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

impl fmt::Display for EnvDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kind={} arms={}", self.kind, self.arms)?;
        if let Some(d) = self.dim {
            write!(f, " dim={d}")?;
        }
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
