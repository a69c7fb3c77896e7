//! Counter-based random streams.
//!
//! Every consumer derives its generator from `(seed, index)` so a parallel
//! evaluation over indices reproduces the serial stream exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generator for a two-level key, e.g. (epoch, batch) or (sample, label draw).
pub fn stream2(seed: u64, outer: u64, inner: u64) -> ChaCha8Rng {
    stream(mix(seed, outer), inner)
}

/// SplitMix64 finalizer over `seed ^ salt`; used to derive child seeds.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
