//! Seeded random streams.
//!
//! Every Monte Carlo quantity is drawn from `ChaCha8Rng` keyed by the user
//! seed, with one ChaCha stream per replicate index. Draws within a
//! replicate are consumed sequentially, so the pair (seed, replicate) fixes
//! the whole sample and disjoint replicate ranges can be processed by
//! independent workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replicate `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
