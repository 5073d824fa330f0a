//! Seeded random number streams.
//!
//! All randomness in the crate is derived from a single 64-bit seed. Named
//! substreams keep independent consumers from perturbing each other, and the
//! per-index variant gives every Monte-Carlo trial its own generator so that
//! parallel evaluation produces the same numbers as a sequential loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Generator seeded directly from `seed`.
pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for the substream named `label` under `seed`.
pub fn named(seed: u64, label: &str) -> SimRng {
    substream(seed, label, 0)
}

/// Generator for trial `index` of the substream named `label`.
pub fn substream(seed: u64, label: &str, index: u64) -> SimRng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    SimRng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, "qlv", 3).random();
        let b: u64 = substream(7, "qlv", 3).random();
        let c: u64 = substream(7, "qlv", 4).random();
        let d: u64 = substream(7, "qdc", 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
