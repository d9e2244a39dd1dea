//! The stochastic combiner: a UCB over base learners whose indices are
//! shifted down by per-learner target regrets, with a drift statistic that
//! permanently drops learners whose rewards decay faster than their claimed
//! regret bound allows.

mod config;
mod grid;
mod run;
mod state;
mod targets;

pub use config::{log_term, CombinerConfig, TargetMode, ThresholdRule};
pub use grid::{build_doubling_grid, DoublingGrid, GridCell};
pub use run::{run, Combiner, StepOutcome};
pub use state::{elimination_test, elimination_threshold, select, ucb_index, CombinerState};
pub use targets::{
    alphabound_sup, check_target_regret_conditions, sqrt_t_targets, target_regrets_from_eta,
    EtaPrior,
};
