use crate::contract::PutativeBound;
use crate::error::{Error, Result};

/// `ln(T^3 N / delta)`, the log factor in every combiner confidence width.
pub fn log_term(horizon: u64, n_bases: usize, delta: f64) -> f64 {
    3.0 * (horizon as f64).ln() + (n_bases as f64).ln() - delta.ln()
}

/// How the target regrets were produced, which decides whether they must pass
/// the feasibility check before a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetMode {
    /// Targets must satisfy the feasibility conditions.
    #[default]
    Checked,
    /// All targets zero, no check (logarithmic-regret regime).
    Gap,
    /// Experiment-supplied targets used as given.
    Override,
}

/// Constant in front of `sqrt(log_term * n)` in the elimination threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdRule {
    /// `3 sqrt(8 log_term n)`, matching the concentration argument.
    #[default]
    Proof,
    /// `3 sqrt(log_term n)` as written in the pseudocode.
    Pseudocode,
}

impl ThresholdRule {
    pub fn factor(self) -> f64 {
        match self {
            ThresholdRule::Proof => 3.0 * 8f64.sqrt(),
            ThresholdRule::Pseudocode => 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerConfig {
    bounds: Vec<PutativeBound>,
    targets: Vec<f64>,
    horizon: u64,
    delta: f64,
    target_mode: TargetMode,
    threshold: ThresholdRule,
    clamp: Option<(f64, f64)>,
}

impl CombinerConfig {
    pub fn new(
        bounds: Vec<PutativeBound>,
        targets: Vec<f64>,
        horizon: u64,
        delta: f64,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("combiner needs at least one base learner"));
        }
        if bounds.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len(),
                got: targets.len(),
            });
        }
        if let Some(r) = targets.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::invalid(format!(
                "target regret must be finite and >= 0, got {r}"
            )));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon must be >= 1"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self {
            bounds,
            targets,
            horizon,
            delta,
            target_mode: TargetMode::Checked,
            threshold: ThresholdRule::Proof,
            clamp: None,
        })
    }

    /// All targets zero and the feasibility check skipped.
    pub fn gap_mode(bounds: Vec<PutativeBound>, horizon: u64, delta: f64) -> Result<Self> {
        let n = bounds.len();
        Ok(Self::new(bounds, vec![0.0; n], horizon, delta)?.with_target_mode(TargetMode::Gap))
    }

    pub fn with_target_mode(mut self, mode: TargetMode) -> Self {
        self.target_mode = mode;
        self
    }

    pub fn with_threshold(mut self, rule: ThresholdRule) -> Self {
        self.threshold = rule;
        self
    }

    /// Clamp observed rewards to `[lo, hi]` before they enter the combiner's
    /// statistics.
    pub fn with_clamp(mut self, lo: f64, hi: f64) -> Self {
        self.clamp = Some((lo, hi));
        self
    }

    pub fn bounds(&self) -> &[PutativeBound] {
        &self.bounds
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_bases(&self) -> usize {
        self.bounds.len()
    }

    pub fn target_mode(&self) -> TargetMode {
        self.target_mode
    }

    pub fn threshold(&self) -> ThresholdRule {
        self.threshold
    }

    pub fn clamp(&self) -> Option<(f64, f64)> {
        self.clamp
    }

    pub fn log_term(&self) -> f64 {
        log_term(self.horizon, self.n_bases(), self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(c: f64) -> PutativeBound {
        PutativeBound::new(c, 0.5).unwrap()
    }

    #[test]
    fn log_term_value() {
        let expect = (1e12f64 * 2.0 / 0.01).ln();
        assert!((log_term(10_000, 2, 0.01) - expect).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(CombinerConfig::new(vec![b(1.0)], vec![0.0, 1.0], 10, 0.1).is_err());
        assert!(CombinerConfig::new(vec![b(1.0)], vec![1.0], 0, 0.1).is_err());
        assert!(CombinerConfig::new(vec![b(1.0)], vec![1.0], 10, 1.0).is_err());
        assert!(CombinerConfig::new(vec![b(1.0)], vec![-1.0], 10, 0.5).is_err());
        assert!(CombinerConfig::new(vec![], vec![], 10, 0.5).is_err());
        let g = CombinerConfig::gap_mode(vec![b(1.0), b(2.0)], 10, 0.5).unwrap();
        assert_eq!(g.targets(), &[0.0, 0.0]);
        assert_eq!(g.target_mode(), TargetMode::Gap);
    }
}
