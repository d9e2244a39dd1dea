use crate::combiner::config::{CombinerConfig, TargetMode};
use crate::combiner::state::{elimination_test, select, CombinerState};
use crate::combiner::targets::check_target_regret_conditions;
use crate::contract::{BaseAlgorithm, Environment};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::trace::RegretTrace;

/// What happened in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub chosen: usize,
    pub action: usize,
    pub reward: f64,
    pub eliminated: bool,
    pub reinstated: bool,
}

/// A running combiner over a fixed list of base learners.
pub struct Combiner<B> {
    bases: Vec<B>,
    cfg: CombinerConfig,
    state: CombinerState,
    trace: RegretTrace,
}

impl<B: BaseAlgorithm> Combiner<B> {
    /// Fails if the learner count does not match the configuration or, for
    /// checked targets, if the targets are infeasible.
    pub fn new(bases: Vec<B>, cfg: CombinerConfig) -> Result<Self> {
        if bases.len() != cfg.n_bases() {
            return Err(Error::DimensionMismatch {
                expected: cfg.n_bases(),
                got: bases.len(),
            });
        }
        if cfg.target_mode() == TargetMode::Checked && !check_target_regret_conditions(&cfg)? {
            return Err(Error::invalid(
                "target regrets fail the feasibility conditions; raise them or mark the config as an override",
            ));
        }
        let state = CombinerState::new(bases.len());
        let trace = RegretTrace::with_capacity(cfg.horizon().min(1 << 22) as usize);
        Ok(Self {
            bases,
            cfg,
            state,
            trace,
        })
    }

    pub fn config(&self) -> &CombinerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &CombinerState {
        &self.state
    }

    pub fn bases(&self) -> &[B] {
        &self.bases
    }

    pub fn trace(&self) -> &RegretTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RegretTrace {
        self.trace
    }

    /// Plays one round against `env`.
    pub fn step<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        rng: &mut SimRng,
    ) -> Result<StepOutcome> {
        let i = select(&self.state, &self.cfg);
        let context = env.draw_context(rng);
        let action = self.bases[i].propose(&context)?;
        let reward = env.reward(&context, action, rng)?;
        self.bases[i].feedback(&context, action, reward)?;

        let observed = match self.cfg.clamp() {
            Some((lo, hi)) => reward.clamp(lo, hi),
            None => reward,
        };
        self.state.record_feedback(i, observed);
        let eliminated = self.state.is_active(i) && elimination_test(&self.state, i, &self.cfg);
        if eliminated {
            self.state.eliminate(i);
        }
        let reinstated = self.state.ensure_nonempty();
        if reinstated {
            self.trace.fallback_resets += 1;
        }

        let best = env.optimal_expected_reward(&context);
        let got = env.expected_reward(&context, action)?;
        self.trace
            .accumulate(best, got, i, self.state.active_count());
        Ok(StepOutcome {
            chosen: i,
            action,
            reward,
            eliminated,
            reinstated,
        })
    }

    /// Plays `rounds` rounds.
    pub fn run_rounds<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        rounds: u64,
        rng: &mut SimRng,
    ) -> Result<()> {
        for _ in 0..rounds {
            self.step(env, rng)?;
        }
        Ok(())
    }
}

/// Runs the combiner for the configured horizon and returns its trace.
pub fn run<E, B>(
    env: &mut E,
    bases: Vec<B>,
    cfg: CombinerConfig,
    rng: &mut SimRng,
) -> Result<RegretTrace>
where
    E: Environment + ?Sized,
    B: BaseAlgorithm,
{
    let horizon = cfg.horizon();
    let mut combiner = Combiner::new(bases, cfg)?;
    combiner.run_rounds(env, horizon, rng)?;
    Ok(combiner.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{make_fixed_arm, make_ucb};
    use crate::combiner::targets::sqrt_t_targets;
    use crate::contract::{BaseAlgorithm, PutativeBound};
    use crate::environments::KArmedEnv;
    use crate::rng::fork_rng;

    fn env() -> KArmedEnv {
        KArmedEnv::bernoulli(vec![0.5, 0.8, 0.3]).unwrap()
    }

    #[test]
    fn unstepped_trace_is_empty() {
        let b = vec![PutativeBound::new(1.0, 0.5).unwrap()];
        let cfg = CombinerConfig::new(b, vec![10.0], 5, 0.1).unwrap();
        let c = Combiner::new(vec![make_fixed_arm(0)], cfg).unwrap();
        assert!(c.trace().is_empty());
    }

    #[test]
    fn single_base_plays_every_round() {
        let b = vec![PutativeBound::new(4.0, 0.5).unwrap()];
        let cfg = CombinerConfig::new(b, vec![400.0], 300, 0.1).unwrap();
        let mut c = Combiner::new(vec![make_ucb(3, 0.5).unwrap()], cfg).unwrap();
        let mut rng = fork_rng(1, 0);
        c.run_rounds(&mut env(), 300, &mut rng).unwrap();
        assert_eq!(c.state().counts(), &[300]);
        assert_eq!(c.trace().len(), 300);
        assert!(c
            .trace()
            .rows
            .iter()
            .all(|r| r.chosen == 0 && r.inst_regret >= 0.0));
    }

    #[test]
    fn rejects_infeasible_checked_targets() {
        let b = vec![PutativeBound::new(10.0, 0.5).unwrap(); 2];
        let cfg = CombinerConfig::new(b, vec![1000.0, 1000.0], 10_000, 0.1).unwrap();
        let bases: Vec<Box<dyn BaseAlgorithm>> =
            vec![Box::new(make_fixed_arm(0)), Box::new(make_fixed_arm(1))];
        assert!(Combiner::new(bases, cfg.clone()).is_err());
        let bases: Vec<Box<dyn BaseAlgorithm>> =
            vec![Box::new(make_fixed_arm(0)), Box::new(make_fixed_arm(1))];
        assert!(Combiner::new(bases, cfg.with_target_mode(TargetMode::Override)).is_ok());
    }

    #[test]
    fn same_seed_same_trace() {
        let bounds = vec![PutativeBound::new(2.0, 0.5).unwrap(); 3];
        let targets = sqrt_t_targets(&bounds, 2000);
        let cfg = CombinerConfig::new(bounds, targets, 2000, 0.05)
            .unwrap()
            .with_target_mode(TargetMode::Override);
        let go = || {
            let bases = vec![make_fixed_arm(0), make_fixed_arm(1), make_fixed_arm(2)];
            let mut rng = fork_rng(99, 3);
            run(&mut env(), bases, cfg.clone(), &mut rng).unwrap()
        };
        let (a, b) = (go(), go());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.len(), 2000);
        let counts: usize = (0..3).map(|i| a.plays_of(i)).sum();
        assert_eq!(counts, 2000);
    }

    #[test]
    fn feeds_only_the_chosen_base() {
        let bounds = vec![PutativeBound::new(1.0, 0.5).unwrap(); 2];
        let cfg = CombinerConfig::gap_mode(bounds, 200, 0.1).unwrap();
        let mut c = Combiner::new(
            vec![make_ucb(3, 0.5).unwrap(), make_ucb(3, 0.5).unwrap()],
            cfg,
        )
        .unwrap();
        let mut rng = fork_rng(5, 0);
        c.run_rounds(&mut env(), 200, &mut rng).unwrap();
        for (i, base) in c.bases().iter().enumerate() {
            let fed: u64 = base.state().counts().iter().sum();
            assert_eq!(fed, c.state().counts()[i]);
        }
    }
}
