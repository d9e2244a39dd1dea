use rand::Rng;

use super::{best_of, gaussian};
use crate::contract::{Context, EnvDescription, Environment};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Gaussian { sigma: f64 },
    Bernoulli,
}

/// Context-free K-armed bandit with fixed means.
#[derive(Debug, Clone)]
pub struct KArmedEnv {
    means: Vec<f64>,
    noise: Noise,
    best: f64,
}

impl KArmedEnv {
    pub fn new(means: Vec<f64>, noise: Noise) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::EmptyArmSet);
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("arm mean"));
        }
        match noise {
            Noise::Bernoulli if means.iter().any(|m| !(0.0..=1.0).contains(m)) => {
                return Err(Error::invalid("Bernoulli means must lie in [0, 1]"));
            }
            Noise::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                return Err(Error::invalid(format!(
                    "noise scale must be >= 0, got {sigma}"
                )));
            }
            _ => {}
        }
        let best = best_of(&means);
        Ok(Self { means, noise, best })
    }

    pub fn gaussian(means: Vec<f64>, sigma: f64) -> Result<Self> {
        Self::new(means, Noise::Gaussian { sigma })
    }

    pub fn bernoulli(means: Vec<f64>) -> Result<Self> {
        Self::new(means, Noise::Bernoulli)
    }

    /// `arms` means drawn uniformly from `[0, 1]`.
    pub fn uniform_means(arms: usize, noise: Noise, rng: &mut SimRng) -> Result<Self> {
        let means = (0..arms).map(|_| rng.random::<f64>()).collect();
        Self::new(means, noise)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    /// First arm with the largest mean.
    pub fn optimal_arm(&self) -> usize {
        self.means.iter().position(|&m| m == self.best).unwrap_or(0)
    }

    fn mean(&self, action: usize) -> Result<f64> {
        self.means.get(action).copied().ok_or(Error::InvalidArm {
            arm: action,
            arms: self.means.len(),
        })
    }
}

impl Environment for KArmedEnv {
    fn arms(&self) -> usize {
        self.means.len()
    }

    fn draw_context(&mut self, _rng: &mut SimRng) -> Context {
        Context::token(self.means.len())
    }

    fn reward(&self, _context: &Context, action: usize, rng: &mut SimRng) -> Result<f64> {
        let m = self.mean(action)?;
        Ok(match self.noise {
            Noise::Gaussian { sigma } => m + gaussian(sigma, rng),
            Noise::Bernoulli => {
                if rng.random::<f64>() < m {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    fn expected_reward(&self, _context: &Context, action: usize) -> Result<f64> {
        self.mean(action)
    }

    fn optimal_expected_reward(&self, _context: &Context) -> f64 {
        self.best
    }

    fn describe(&self) -> EnvDescription {
        let d = EnvDescription::new("karmed", self.means.len(), None).param("best_mean", self.best);
        match self.noise {
            Noise::Gaussian { sigma } => d.param("sigma", sigma),
            Noise::Bernoulli => d.param("bernoulli", 1.0),
        }
    }
}
