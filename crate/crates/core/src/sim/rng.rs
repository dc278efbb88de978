//! Deterministic substreams for reproducible, parallelisable sampling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator family recorded in every sample report.
pub const RNG_FAMILY: &str = "chacha12/stream-per-sample";

/// Independent stream for sample `index` under `seed`; identical inputs give
/// identical draws, and distinct indices may run concurrently.
pub fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = substream(1, 0).random();
        let b: f64 = substream(1, 0).random();
        let c: f64 = substream(1, 1).random();
        let d: f64 = substream(2, 0).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
