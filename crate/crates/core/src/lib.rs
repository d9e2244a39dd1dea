//! Upper-confidence combination of stochastic bandit learners.
//!
//! The crate is organised around a small set of contracts ([`contract`]):
//! base learners propose actions and receive feedback, environments draw
//! contexts and rewards, and every run is recorded as a [`RegretTrace`] of
//! pseudo-regret. On top of those sit
//!
//! - [`bases`]: UCB, linUCB (with coordinate-prefix restriction), fixed-arm
//!   players and arm-subset restrictions;
//! - [`combiner`]: the stochastic combiner with shifted confidence indices,
//!   drift-statistic elimination, target-regret construction and the
//!   duplication grid for unknown bounds;
//! - [`adversarial`]: the ellipsoid-based combiner for linUCB learners facing
//!   adversarially chosen feature maps;
//! - [`environments`]: synthetic K-armed and linear test beds;
//! - [`harness`]: configuration, calibration, seeded replication and CSV
//!   output, plus the brute-force oracles used by the tests.

pub mod adversarial;
pub mod bases;
pub mod combiner;
pub mod contract;
pub mod environments;
pub mod error;
pub mod harness;
pub mod rng;
pub mod trace;

pub use contract::{BaseAlgorithm, Context, Environment, PutativeBound};
pub use error::{Error, Result};
pub use rng::{fork_rng, SimRng};
pub use trace::{RegretTrace, TraceRow};
