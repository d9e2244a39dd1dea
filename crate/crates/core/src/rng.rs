//! Deterministic, forkable random streams.
//!
//! Every consumer in a replication (environment construction, reward noise,
//! each base learner, the combiner) draws from its own ChaCha stream keyed by
//! `(seed, stream_id)`. Streams with different ids never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream ids within one replication.
pub mod stream {
    pub const ENV_INSTANCE: u64 = 0;
    pub const ENV_NOISE: u64 = 1;
    pub const COMBINER: u64 = 2;
    /// Base learner `i` uses `BASE_OFFSET + i`.
    pub const BASE_OFFSET: u64 = 16;
    /// Consumers per replication; replication `r` owns ids `r * PER_REPLICATION ..`.
    pub const PER_REPLICATION: u64 = 1 << 24;
    /// Calibration replications start here so they never share a stream with
    /// the experiment proper.
    pub const CALIBRATION_BASE: u64 = 1 << 48;
}

pub fn fork_rng(base_seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id of `consumer` inside replication `rep`.
pub fn replication_stream(rep: u64, consumer: u64) -> u64 {
    rep * stream::PER_REPLICATION + consumer
}
