//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a 64-bit
//! seed and a stream id. Seeds for sub-experiments are derived from a master
//! seed and a list of integer coordinates with a SplitMix64 finalizer, so a
//! realization's randomness depends only on its coordinates and never on the
//! order in which realizations are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used by the reservoir builders.
pub const STREAM_RESERVOIR: u64 = 0;
pub const STREAM_INPUT_WEIGHTS: u64 = 1;
pub const STREAM_SIGNAL: u64 = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `coords` into `master` one coordinate at a time.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_order_sensitive_and_stable() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[1]), derive_seed(8, &[1]));
    }

    #[test]
    fn streams_are_independent() {
        let a: u64 = stream(3, 0).random();
        let b: u64 = stream(3, 1).random();
        assert_ne!(a, b);
        let again: u64 = stream(3, 0).random();
        assert_eq!(a, again);
    }
}
