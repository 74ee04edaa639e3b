//! Deterministic random streams keyed by `(seed, stream_id)`.
//!
//! ChaCha is counter based, so independent streams are obtained by selecting
//! the stream word rather than by reseeding; results do not depend on how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
