use crate::bases::argmax_first;
use crate::contract::{BaseAlgorithm, Context};
use crate::error::{Error, Result};

/// Empirical means and pull counts with a `conf_scale / sqrt(n)` bonus.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    means: Vec<f64>,
    conf_scale: f64,
}

/// Default UCB width scale `noise_scale * sqrt(2 ln(2 T K / delta))`.
///
/// `noise_scale = 1` is the conservative choice for rewards in `[0, 1]`; for
/// Gaussian noise pass its standard deviation.
pub fn ucb_conf_scale(horizon: u64, arms: usize, delta: f64, noise_scale: f64) -> f64 {
    noise_scale * (2.0 * (2.0 * horizon.max(1) as f64 * arms.max(1) as f64 / delta).ln()).sqrt()
}

impl UcbState {
    pub fn new(arms: usize, conf_scale: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::EmptyArmSet);
        }
        if !conf_scale.is_finite() || conf_scale < 0.0 {
            return Err(Error::invalid(format!(
                "conf_scale must be >= 0, got {conf_scale}"
            )));
        }
        Ok(Self {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            conf_scale,
        })
    }

    /// Restores a state from explicit statistics; used by tests and by callers
    /// that checkpoint learners.
    pub fn from_parts(counts: Vec<u64>, means: Vec<f64>, conf_scale: f64) -> Result<Self> {
        if counts.len() != means.len() {
            return Err(Error::DimensionMismatch {
                expected: counts.len(),
                got: means.len(),
            });
        }
        let mut s = Self::new(counts.len(), conf_scale)?;
        s.counts = counts;
        s.means = means;
        Ok(s)
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn conf_scale(&self) -> f64 {
        self.conf_scale
    }

    /// Optimistic index; unpulled arms are `+inf`.
    pub fn index(&self, arm: usize) -> f64 {
        match self.counts[arm] {
            0 => f64::INFINITY,
            n => self.means[arm] + self.conf_scale / (n as f64).sqrt(),
        }
    }

    pub fn select(&self) -> Result<usize> {
        argmax_first((0..self.arms()).map(|a| self.index(a))).ok_or(Error::EmptyArmSet)
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms() {
            return Err(Error::InvalidArm {
                arm,
                arms: self.arms(),
            });
        }
        if !reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        self.counts[arm] += 1;
        self.means[arm] += (reward - self.means[arm]) / self.counts[arm] as f64;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.means.iter_mut().for_each(|m| *m = 0.0);
    }
}

/// UCB over a subset of the environment's arms. Proposals are global arm
/// indices.
#[derive(Debug, Clone)]
pub struct Ucb {
    arms: Vec<usize>,
    state: UcbState,
}

pub fn make_restricted_ucb(arm_subset: &[usize], conf_scale: f64) -> Result<Ucb> {
    if arm_subset.is_empty() {
        return Err(Error::EmptyArmSet);
    }
    let mut arms = arm_subset.to_vec();
    arms.sort_unstable();
    arms.dedup();
    Ok(Ucb {
        state: UcbState::new(arms.len(), conf_scale)?,
        arms,
    })
}

pub fn make_ucb(arms: usize, conf_scale: f64) -> Result<Ucb> {
    make_restricted_ucb(&(0..arms).collect::<Vec<_>>(), conf_scale)
}

impl Ucb {
    pub fn arm_subset(&self) -> &[usize] {
        &self.arms
    }

    pub fn state(&self) -> &UcbState {
        &self.state
    }
}

impl BaseAlgorithm for Ucb {
    fn propose(&mut self, context: &Context) -> Result<usize> {
        let arm = self.arms[self.state.select()?];
        context.check_arm(arm)?;
        Ok(arm)
    }

    fn feedback(&mut self, _context: &Context, action: usize, reward: f64) -> Result<()> {
        let local = self
            .arms
            .binary_search(&action)
            .map_err(|_| Error::InvalidArm {
                arm: action,
                arms: self.arms.len(),
            })?;
        self.state.update(local, reward)
    }

    fn reset(&mut self) {
        self.state.reset();
    }

    fn name(&self) -> String {
        match (self.arms.first(), self.arms.last()) {
            (Some(lo), Some(hi)) if hi - lo + 1 == self.arms.len() => format!("ucb[{lo}..={hi}]"),
            _ => format!("ucb{:?}", self.arms),
        }
    }
}
