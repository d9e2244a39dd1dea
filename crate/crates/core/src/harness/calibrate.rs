use serde::{Deserialize, Serialize};

use crate::contract::{BaseAlgorithm, Environment};
use crate::error::{Error, Result};
use crate::rng::{fork_rng, stream, SimRng};
use crate::trace::RegretTrace;

/// Fitted envelope coefficient for one learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub base: String,
    pub alpha: f64,
    pub horizon: u64,
    /// `margin * max(per_rep)`.
    pub coefficient: f64,
    pub margin: f64,
    /// `max_t regret(t) / t^alpha` for each replication.
    pub per_rep: Vec<f64>,
}

/// Runs one learner alone for `horizon` rounds.
pub fn run_alone<E, B>(
    env: &mut E,
    base: &mut B,
    horizon: u64,
    rng: &mut SimRng,
) -> Result<RegretTrace>
where
    E: Environment + ?Sized,
    B: BaseAlgorithm + ?Sized,
{
    let mut trace = RegretTrace::with_capacity(horizon.min(1 << 22) as usize);
    for _ in 0..horizon {
        let context = env.draw_context(rng);
        let action = base.propose(&context)?;
        let reward = env.reward(&context, action, rng)?;
        base.feedback(&context, action, reward)?;
        let best = env.optimal_expected_reward(&context);
        trace.accumulate(best, env.expected_reward(&context, action)?, 0, 1);
    }
    Ok(trace)
}

/// `max_t regret(t) / t^alpha` along a trace.
pub fn envelope_ratio(trace: &RegretTrace, alpha: f64) -> f64 {
    trace
        .rows
        .iter()
        .map(|r| r.cum_regret / (r.t as f64).powf(alpha))
        .fold(0.0, f64::max)
}

/// Runs a fresh learner on a fresh environment instance `reps` times and
/// takes the largest `regret(t) / t^alpha` seen. Replication `r` draws its
/// instance and noise from calibration streams of `seed`, disjoint from the
/// experiment streams.
pub fn calibrate_putative_bound<E, B>(
    name: &str,
    mut make_base: impl FnMut() -> Result<B>,
    mut make_env: impl FnMut(&mut SimRng) -> Result<E>,
    horizon: u64,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<CalibrationResult>
where
    E: Environment,
    B: BaseAlgorithm,
{
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0.5, 1], got {alpha}"
        )));
    }
    if reps == 0 {
        return Err(Error::invalid("calibration needs at least one replication"));
    }
    let mut per_rep = Vec::with_capacity(reps);
    for r in 0..reps as u64 {
        let base_stream = stream::CALIBRATION_BASE + r * stream::PER_REPLICATION;
        let mut env = make_env(&mut fork_rng(seed, base_stream + stream::ENV_INSTANCE))?;
        let mut rng = fork_rng(seed, base_stream + stream::ENV_NOISE);
        let mut base = make_base()?;
        let trace = run_alone(&mut env, &mut base, horizon, &mut rng)?;
        per_rep.push(envelope_ratio(&trace, alpha));
    }
    let coefficient = per_rep.iter().copied().fold(0.0, f64::max);
    Ok(CalibrationResult {
        base: name.to_string(),
        alpha,
        horizon,
        coefficient,
        margin: 1.0,
        per_rep,
    })
}

impl CalibrationResult {
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.coefficient = self.per_rep.iter().copied().fold(0.0, f64::max) * margin;
        self.margin = margin;
        self
    }
}
