//! Seeded random sources. Every stochastic routine in the crate draws from these.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Deterministic random source for `seed`.
pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child stream `stream` of `seed`, for parallel work (restarts, conversations).
pub fn derived_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_add(1));
    rng
}

/// A seed for child `stream`, for APIs that take a seed rather than a generator.
pub fn derived_seed(seed: u64, stream: u64) -> u64 {
    derived_rng(seed, stream).next_u64()
}
