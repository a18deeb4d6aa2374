use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::qsim::{Axis, Operator, Ramp, RampKind};

/// Unitary control error `Γ(s) Σ_i m̂_i·σ⃗_i` with fixed random directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub directions: Vec<[f64; 3]>,
    pub ramp: Ramp,
    pub seed: u64,
}

impl NoiseModel {
    /// Draws one unit direction per qubit from normalized standard normals.
    pub fn new(n: usize, kind: RampKind, c: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let directions = (0..n).map(|_| random_direction(&mut rng)).collect();
        Self {
            directions,
            ramp: Ramp { kind, c },
            seed,
        }
    }

    pub fn qubits(&self) -> usize {
        self.directions.len()
    }

    /// `Σ_i m̂_i·σ⃗_i` without the time profile.
    pub fn operator(&self) -> Operator {
        let n = self.qubits();
        let mut op = Operator::zero(n);
        for (q, m) in self.directions.iter().enumerate() {
            for (axis, w) in [Axis::X, Axis::Y, Axis::Z].into_iter().zip(m) {
                let term = Operator::pauli_term(n, &[(q, axis)]).expect("qubit in range");
                op = op.plus(&term.scaled(*w)).expect("same qubit count");
            }
        }
        op
    }

    pub fn amplitude(&self, s: f64) -> f64 {
        self.ramp.value(s)
    }
}

pub fn noise_hamiltonian_at(model: &NoiseModel, s: f64) -> Operator {
    model.operator().scaled(model.amplitude(s))
}

pub(crate) fn random_direction<R: rand::Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.map(|x| x / norm);
        }
    }
}
