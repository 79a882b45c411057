//! Stable seed derivation.
//!
//! Every random decision is drawn from a ChaCha stream keyed by the global
//! seed plus a tag and a stable identifier (article id, sample size, repeat
//! index, ...). Work items therefore never share RNG state, so results do
//! not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 13;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `base` with a domain tag and a byte key into a new 64-bit seed.
pub fn derive_seed(base: u64, tag: &str, key: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in tag.as_bytes().iter().chain([0xffu8].iter()).chain(key) {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(base ^ splitmix64(h))
}

pub fn rng_for(base: u64, tag: &str, key: &[u8]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tag, key))
}
