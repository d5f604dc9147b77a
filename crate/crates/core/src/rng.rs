//! Seeded random streams.
//!
//! Every individual produced during a run gets its own generator derived
//! from `(seed, generation, slot)`, so results do not depend on how work
//! is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for one `(generation, slot)` of the run seeded with `seed`.
pub fn stream(seed: u64, generation: u64, slot: u64) -> RunRng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ generation) ^ slot.wrapping_add(0x5851_F42D));
    ChaCha8Rng::seed_from_u64(key)
}
