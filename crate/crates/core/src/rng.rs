//! Reproducible random streams for parallel Monte-Carlo work.
//!
//! Every independent unit of work (a trial block, a frame) owns one ChaCha
//! stream selected by `(seed, stream)`, so results never depend on how the
//! work is scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
