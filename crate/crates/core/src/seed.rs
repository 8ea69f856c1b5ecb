//! Deterministic seed splitting. Every stochastic component draws from a
//! ChaCha stream keyed by a sub-seed derived from the parent seed and an
//! index, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for child `index` of `seed`. Injective in `index` for a fixed seed.
pub fn derive(seed: u64, index: u64) -> u64 {
    // mix64 is a bijection, so distinct indices give distinct outputs.
    mix64(mix64(seed) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Named sub-streams used inside one replication.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Fading = 2,
    TaskSizes = 3,
    RuinPaths = 4,
}

pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    derive(seed ^ 0x5eed_0000_0000_0000, stream as u64)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: HashSet<u64> = (0..10_000).map(|i| derive(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn derivation_is_stable() {
        assert_eq!(derive(7, 3), derive(7, 3));
        assert_ne!(derive(7, 3), derive(8, 3));
    }
}
