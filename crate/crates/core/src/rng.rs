//! Counter-based seeding. Every trial derives its own generator from the
//! master seed and a path of integers, so results never depend on the order
//! in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer applied to `seed` combined with `stream`.
pub fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for the stream addressed by `path` under `master`.
pub fn stream_rng(master: u64, path: &[u64]) -> Rng {
    let seed = path.iter().fold(mix(master, 0), |acc, &p| mix(acc, p.wrapping_add(1)));
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator from a plain seed.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
