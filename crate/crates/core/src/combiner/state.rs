use crate::bases::argmax_first;
use crate::combiner::config::CombinerConfig;
use crate::error::{Error, Result};

/// Per-learner statistics of the combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerState {
    counts: Vec<u64>,
    means: Vec<f64>,
    drift: Vec<f64>,
    active: Vec<bool>,
    round: u64,
    fallback_resets: u32,
}

impl CombinerState {
    pub fn new(n_bases: usize) -> Self {
        Self {
            counts: vec![0; n_bases],
            means: vec![0.0; n_bases],
            drift: vec![0.0; n_bases],
            active: vec![true; n_bases],
            round: 0,
            fallback_resets: 0,
        }
    }

    /// State with given counts and means (zero drift, all active).
    pub fn from_parts(counts: Vec<u64>, means: Vec<f64>) -> Result<Self> {
        if counts.len() != means.len() {
            return Err(Error::DimensionMismatch {
                expected: counts.len(),
                got: means.len(),
            });
        }
        let mut s = Self::new(counts.len());
        s.round = counts.iter().sum();
        s.counts = counts;
        s.means = means;
        Ok(s)
    }

    pub fn n_bases(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Running `sum_tau (mu_hat_{tau-1} - r_tau)` per learner.
    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.n_bases()).filter(|&i| self.active[i]).collect()
    }

    pub fn fallback_resets(&self) -> u32 {
        self.fallback_resets
    }

    /// Folds one observed reward for learner `i` into its drift statistic
    /// (using the mean before this reward, with `mu_hat_0 = 0`) and then into
    /// its running mean.
    pub fn record_feedback(&mut self, i: usize, r_hat: f64) {
        self.drift[i] += self.means[i] - r_hat;
        self.counts[i] += 1;
        self.means[i] += (r_hat - self.means[i]) / self.counts[i] as f64;
        self.round += 1;
    }

    pub fn eliminate(&mut self, i: usize) {
        self.active[i] = false;
    }

    /// Reinstates every learner if the active set is empty. Returns whether it
    /// did.
    pub fn ensure_nonempty(&mut self) -> bool {
        if self.active.iter().any(|a| *a) {
            return false;
        }
        self.active.iter_mut().for_each(|a| *a = true);
        self.fallback_resets += 1;
        true
    }

    /// Adds `c` to every stored mean. Index differences do not change.
    pub fn shift_means(&mut self, c: f64) {
        self.means.iter_mut().for_each(|m| *m += c);
    }
}

/// Shifted optimistic index of learner `i`:
/// `mu_hat + min(1, (C n^alpha + sqrt(8 L n)) / n) - R / T`, with the bonus
/// fixed at 1 and `mu_hat = 0` while `n = 0`.
pub fn ucb_index(i: usize, state: &CombinerState, cfg: &CombinerConfig) -> f64 {
    let n = state.counts[i];
    let shift = cfg.targets()[i] / cfg.horizon() as f64;
    if n == 0 {
        return 1.0 - shift;
    }
    let n = n as f64;
    let bound = cfg.bounds()[i];
    let width = (bound.at(n) + (8.0 * cfg.log_term() * n).sqrt()) / n;
    state.means[i] + width.min(1.0) - shift
}

/// Active learner with the largest index; lowest index on ties. With an empty
/// active set every learner is considered.
pub fn select(state: &CombinerState, cfg: &CombinerConfig) -> usize {
    let candidates = match state.active_indices() {
        v if v.is_empty() => (0..state.n_bases()).collect(),
        v => v,
    };
    let best = argmax_first(candidates.iter().map(|&i| ucb_index(i, state, cfg)))
        .expect("combiner has at least one learner");
    candidates[best]
}

/// `C n^alpha + k sqrt(L n)` with `k` from the configured threshold rule.
pub fn elimination_threshold(i: usize, n: u64, cfg: &CombinerConfig) -> f64 {
    let n = n as f64;
    cfg.bounds()[i].at(n) + cfg.threshold().factor() * (cfg.log_term() * n).sqrt()
}

/// True when learner `i`'s drift statistic reaches its threshold.
pub fn elimination_test(state: &CombinerState, i: usize, cfg: &CombinerConfig) -> bool {
    let n = state.counts[i];
    n > 0 && state.drift[i] >= elimination_threshold(i, n, cfg)
}
