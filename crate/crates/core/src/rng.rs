//! Seeded randomness. Every randomized routine in the crate draws from a
//! [`Rng`] built here, so results are pure functions of their inputs and seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-task, e.g. the negatives of
/// epoch 3 under run seed 42.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A plain seed for a sub-task that takes a `u64` rather than an [`Rng`].
pub fn substream_seed(seed: u64, stream: u64) -> u64 {
    substream(seed, stream).next_u64()
}
