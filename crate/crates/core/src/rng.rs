//! Seeded, splittable randomness.
//!
//! Every stochastic routine in the crate draws from a [`SplitRng`]. A
//! generator is identified by a `(seed, stream)` pair: the seed selects the
//! ChaCha key and the stream selects one of 2^64 independent keystreams under
//! that key, so trial `i` of a randomized run can be regenerated on its own
//! without replaying trials `0..i`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SplitRng = ChaCha20Rng;

/// Generator for stream 0 of `seed`.
pub fn seeded(seed: u64) -> SplitRng {
    stream(seed, 0)
}

/// Generator for `(seed, index)`; independent of every other index.
pub fn stream(seed: u64, index: u64) -> SplitRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
