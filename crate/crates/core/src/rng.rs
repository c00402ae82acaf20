//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8 keyed by a 64-bit seed, with
//! the 64-bit ChaCha stream id selecting an independent substream (one per
//! Monte Carlo trial, replicate, and so on). ChaCha is a counter-mode
//! generator, so a `(seed, stream)` pair names the same sequence of numbers on
//! every platform and no matter in which order the substreams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an unrelated seed from `(seed, domain, index)` with the SplitMix64
/// finalizer. Used when a nested experiment needs seeds of its own.
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    let mut z = seed
        ^ domain.wrapping_mul(0xD1B5_4A32_D192_ED03)
        ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_and_stream_repeat() {
        let a: Vec<u64> = stream(7, 3).random_iter().take(8).collect();
        let b: Vec<u64> = stream(7, 3).random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let a: u64 = stream(7, 3).random();
        let b: u64 = stream(7, 4).random();
        let c: u64 = stream(8, 3).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pinned_first_output() {
        // Guards against a silent change of generator across dependency bumps.
        let first: u64 = stream(0, 0).random();
        assert_eq!(first, 0xb585_f767_a79a_3b6c);
        assert_eq!(derive_seed(0, 0, 0), 0xe220_a839_7b1d_cdaf);
        assert_ne!(derive_seed(0, 0, 0), derive_seed(0, 0, 1));
        assert_ne!(derive_seed(0, 1, 0), derive_seed(0, 0, 0));
    }
}
