//! Seed derivation.
//!
//! One global seed fans out into per-stage seeds by hashing a stage label
//! together with the seed, so adding a stage never shifts another stage's
//! random stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a stage seed from `seed` and a textual label.
pub fn derive(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"graphlens/");
    h.update(label.as_bytes());
    h.update(b"/");
    h.update(seed.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 has 32 bytes"))
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combine a seed with a tuple of integer coordinates into an RNG.
pub fn rng_for(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    let mut s = mix64(seed);
    for &c in coords {
        s = mix64(s ^ c);
    }
    ChaCha8Rng::seed_from_u64(s)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
