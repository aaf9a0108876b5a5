//! Deterministic random streams.
//!
//! Every run derives independent streams from `(base_seed, run, purpose)` so
//! runs can execute in any order, or in parallel, and still produce the same
//! numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream purposes within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Environment = 1,
    Agent = 2,
    Trainer = 3,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_seed(base_seed: u64, run: u64) -> u64 {
    mix64(base_seed ^ mix64(run.wrapping_add(1)))
}

pub fn stream(base_seed: u64, run: u64, purpose: Stream) -> SimRng {
    let seed = mix64(run_seed(base_seed, run) ^ (purpose as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    SimRng::seed_from_u64(seed)
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
