//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a ChaCha8 stream addressed
//! by `(seed, stream)`. ChaCha is counter based, so distinct stream ids give
//! independent sequences and parallel workers can each own one without
//! coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
