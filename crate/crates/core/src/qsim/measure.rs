use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QuantumState;

/// `shots` independent computational-basis measurements of `state`.
pub fn sample_measurements(state: &QuantumState, shots: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(state, shots, &mut rng)
}

pub fn sample_with<R: Rng + ?Sized>(state: &QuantumState, shots: usize, rng: &mut R) -> Vec<usize> {
    let probs = state.probabilities();
    let dist = WeightedIndex::new(&probs).expect("a normalized state has positive total weight");
    (0..shots).map(|_| dist.sample(rng)).collect()
}
