//! Seed handling.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by
//! `(seed, stream)`, so independent consumers of one user seed never share
//! state and results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids reserved for the library's own consumers.
pub(crate) mod streams {
    pub const DIRECTIONS: u64 = 1;
    pub const SAMPLES: u64 = 2;
    pub const MIXTURE_LABELS: u64 = 3;
    pub const FLOW_INIT: u64 = 4;
    pub const FLOW_EVAL: u64 = 5;
    pub const FLOW_BATCH: u64 = 6;
}

/// A generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; derives a well-mixed child seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
