//! Seed derivation. Every random stream is a ChaCha8 generator keyed by
//! `base seed + index` with a role tag selecting the cipher stream, so
//! restarts and grid seeds never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Directions = 1,
    Landscape = 2,
    Starts = 3,
    Problem = 4,
}

pub fn stream(seed: u64, role: Role, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index));
    rng.set_stream(role as u64);
    rng
}
