//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use witt_core::{Family, Ring, TruncationSet, WittRing, WittVector};

pub fn set(elems: &[u64]) -> TruncationSet {
    TruncationSet::new(elems).expect("valid truncation set")
}

/// A ring over ℤ[q] with `q` bound to the variable.
pub fn ring(family: Family, elems: &[u64]) -> Arc<WittRing> {
    WittRing::natural(family, set(elems), Ring::zq()).expect("ring builds")
}

/// `count` seeded random vectors.
pub fn vectors(ring: &Arc<WittRing>, count: usize, seed: u64) -> Vec<WittVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| WittVector::random(ring, &mut rng))
        .collect()
}
