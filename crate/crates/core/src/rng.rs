//! Seeded generators. Every stochastic operation takes its generator
//! explicitly; these helpers keep the derivation of child streams in one
//! place so runs replay bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed` (SplitMix64 finaliser over
/// the pair, so neighbouring seeds and streams do not overlap).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn child(seed: u64, stream: u64) -> SimRng {
    seeded(derive_seed(seed, stream))
}
