//! Seed derivation for reproducible, scheduling-independent generation.
//!
//! Every sample draws from its own ChaCha stream seeded by
//! `derive_seed(global_seed, index, attempt)`, so outputs depend only on the
//! configuration and seed, never on worker count or scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; decorrelates nearby seeds.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a global seed with a sample index and retry attempt into one stream seed.
pub fn derive_seed(global: u64, index: u64, attempt: u64) -> u64 {
    let mut s = splitmix64(global);
    s = splitmix64(s ^ index.wrapping_mul(0xA076_1D64_78BD_642F));
    splitmix64(s ^ attempt.wrapping_mul(0xE703_7ED1_A0B4_28DB))
}

/// Deterministic stream used throughout the pipeline.
pub type Stream = ChaCha12Rng;

/// Build the rng stream for one derived seed.
pub fn stream(seed: u64) -> Stream {
    ChaCha12Rng::seed_from_u64(seed)
}
