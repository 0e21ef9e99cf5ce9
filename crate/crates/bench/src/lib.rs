//! Seeded inputs shared by the benchmarks.

use deltaset_core::FiniteSet;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `size` distinct values drawn uniformly from `[1, span]`.
pub fn random_set(size: usize, span: i64, seed: u64) -> FiniteSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<i64> = sample(&mut rng, span as usize, size)
        .into_iter()
        .map(|i| i as i64 + 1)
        .collect();
    v.sort_unstable();
    FiniteSet::from_elements(v).expect("sampled values are distinct and positive")
}
