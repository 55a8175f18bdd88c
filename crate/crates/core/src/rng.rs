//! Seed fan-out.
//!
//! Every consumer of randomness gets its own ChaCha8 stream derived from the
//! master seed: the 64-bit seed picks the key and a fixed stream id picks the
//! ChaCha stream. Streams never overlap, so adding draws to one consumer does
//! not shift the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used across the crate.
pub mod stream {
    pub const NET_INIT: u64 = 1;
    pub const EXPLORATION: u64 = 2;
    pub const REPLAY: u64 = 3;
    pub const UPDATE_NOISE: u64 = 4;
    pub const WARMUP: u64 = 5;
    pub const SCENARIO: u64 = 6;
    pub const LHS: u64 = 7;
    pub const PROPOSAL: u64 = 8;
    pub const TRIAL_SEEDS: u64 = 9;
    pub const EVAL: u64 = 10;
}

/// A ChaCha8 generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent child seed (splitmix64 finalizer over seed and tag).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
