//! Base learners.
//!
//! All of them implement [`BaseAlgorithm`](crate::contract::BaseAlgorithm).
//! Arm restriction (`make_restricted_ucb`) and coordinate-prefix restriction
//! (`make_restricted_linucb`) are how the misspecified and model-selection
//! rosters are built.

mod fixed;
mod linucb;
mod ucb;

pub use fixed::{make_fixed_arm, FixedArm};
pub use linucb::{make_restricted_linucb, oful_beta, LinUcb, LinUcbState, SolveMode};
pub use ucb::{make_restricted_ucb, make_ucb, ucb_conf_scale, Ucb, UcbState};

/// Index of the maximum, lowest index on ties. `None` for an empty iterator.
pub(crate) fn argmax_first<I: IntoIterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
