//! Seeded random number generation.
//!
//! Every random choice in the crate goes through ChaCha8 (`rand_chacha`),
//! whose output stream is fully specified and identical on every platform.
//! Independent sub-streams (one per tree, per sampling stage, ...) are derived
//! from a master seed with [`stream`], so results never depend on the order in
//! which work items are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for a single seed.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for sub-stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids used by the pipeline stages.
pub mod streams {
    pub const SAMPLE: u64 = 1;
    pub const FOREST: u64 = 2;
    pub const SYNTHETIC: u64 = 3;
}
