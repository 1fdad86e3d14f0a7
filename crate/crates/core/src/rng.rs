//! Seed derivation and the workspace's one random number generator.
//!
//! Every random stream in this workspace is a ChaCha8 stream cipher seeded by
//! a 64-bit value derived deterministically from a master seed and a stream
//! salt. Centralizing the derivation has one purpose: two runs that share a
//! master seed also share their exploration randomness stream-for-stream,
//! even when other configuration differs, which is what makes paired
//! comparisons between strategies meaningful instead of noisy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator algorithm, recorded in config files so that a
/// trace names the exact stream cipher behind it.
pub const RNG_ALGORITHM: &str = "chacha8";

/// One application of the splitmix64 output function: a bijective 64-bit
/// mixer with good avalanche behavior, standard for turning correlated seed
/// material into independent-looking seeds.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a salt naming
/// the stream (one salt per role: user exploration, opponent, channel, ...).
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    splitmix64(master.wrapping_add(splitmix64(salt)))
}

/// Builds the workspace generator from a 64-bit seed.
pub fn make_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
