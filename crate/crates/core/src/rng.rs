//! Deterministic seeding. Every experiment draws from ChaCha8 streams so that a
//! recorded seed reproduces the run bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for ensemble member `index`; members use `seed + index`.
pub fn member(seed: u64, index: usize) -> Rng {
    seeded(seed.wrapping_add(index as u64))
}
