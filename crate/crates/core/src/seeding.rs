//! Deterministic random streams.
//!
//! Every ensemble member draws from its own ChaCha20 stream keyed by
//! `(master_seed, index)`, so aggregate results do not depend on the order or
//! the degree of parallelism in which members run.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

pub fn master_rng(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
