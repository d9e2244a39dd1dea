//! Pseudo-regret bookkeeping.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Round index, starting at 1.
    pub t: u64,
    /// Index of the base learner that acted.
    pub chosen: usize,
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub active_count: usize,
}

/// Per-round record of a run. Regret is always computed from expected
/// rewards, never from noisy observations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
    /// Times the active set emptied and every learner was reinstated.
    pub fallback_resets: u32,
}

impl RegretTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            rows: Vec::with_capacity(n),
            fallback_resets: 0,
        }
    }

    /// Append one round with instantaneous regret `r_star - r`.
    pub fn accumulate(&mut self, r_star: f64, r: f64, chosen: usize, active: usize) {
        let t = self.rows.last().map_or(1, |row| row.t + 1);
        let inst = r_star - r;
        self.rows.push(TraceRow {
            t,
            chosen,
            inst_regret: inst,
            cum_regret: self.total() + inst,
            active_count: active,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cumulative regret after the last round (0 for an empty trace).
    pub fn total(&self) -> f64 {
        self.rows.last().map_or(0.0, |row| row.cum_regret)
    }

    /// Cumulative regret after round `t` (1-based); 0 for `t = 0`.
    pub fn cumulative_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.rows[t - 1].cum_regret
        }
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cum_regret).collect()
    }

    /// Number of rounds in which base `i` acted.
    pub fn plays_of(&self, i: usize) -> usize {
        self.rows.iter().filter(|r| r.chosen == i).count()
    }
}
