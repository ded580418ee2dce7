//! Named seed derivation.
//!
//! Every random stream in the pipeline is derived from one root seed plus a
//! component label and a short index path, so no stage shares or consumes a
//! stream that belongs to another and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a hash.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derive a child seed from `root` for `(label, path...)`.
pub fn derive_seed(root: u64, label: &str, path: &[u64]) -> u64 {
    let mut h = splitmix64(root ^ fnv1a(label.as_bytes()));
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_rng(root: u64, label: &str, path: &[u64]) -> Rng {
    seeded(derive_seed(root, label, path))
}
