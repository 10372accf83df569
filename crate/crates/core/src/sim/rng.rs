//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator (a counter-based cipher RNG) keyed by
//! the 64-bit user seed. The 64-bit stream id packs the replication index and
//! the purpose of the draws: `replication << 8 | purpose`. Streams with
//! different ids never overlap, so replications can run in any order or
//! concurrently and still draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Design = 1,
    Noise = 2,
    Folds = 3,
    Auxiliary = 4,
}

pub fn stream(seed: u64, replication: u64, purpose: Purpose) -> ChaCha8Rng {
    assert!(replication < (1 << 56), "replication index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replication << 8) | purpose as u64);
    rng
}
