//! Deterministic per-task random streams.
//!
//! Every independent unit of work (a pair search, a teleportation run) gets
//! its own stream derived from `(master_seed, index)`, so results do not
//! depend on scheduling or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer over the master seed and task index.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(master_seed: u64, index: u64) -> SimRng {
    stream(derive_seed(master_seed, index))
}
