use num_complex::Complex64 as C64;

use super::SimError;

const NORM_TOL: f64 = 1e-9;

/// Pure state of `n` qubits as `2^n` amplitudes.
///
/// Qubit 0 is the most significant bit of the basis index, so `|q0 q1 … q_{n-1}⟩`
/// reads left to right as a binary number.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amps: Vec<C64>,
}

impl QuantumState {
    pub fn basis(n: usize, index: usize) -> Result<Self, SimError> {
        let dim = 1usize << n;
        if index >= dim {
            return Err(SimError::IndexOutOfRange { index, dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `|+⟩^⊗n`, the uniform superposition.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            n,
            amps: vec![C64::new(a, 0.0); dim],
        }
    }

    /// Validates length `2^n` and unit norm (to 1e-9).
    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self, SimError> {
        if amps.len() != 1usize << n {
            return Err(SimError::DimensionMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        let state = Self { n, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() >= NORM_TOL {
            return Err(SimError::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(n: usize, mut amps: Vec<C64>) -> Result<Self, SimError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::NotNormalized { norm });
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(n, amps)
    }

    pub(crate) fn from_raw(n: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64, SimError> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨index|ψ⟩|²` for every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Pure-state trace-norm distance `√(1 − |⟨a|b⟩|²)`.
///
/// Evaluated as the norm of the part of `b` orthogonal to `a`, which keeps full
/// relative precision when the states are nearly equal.
pub fn trace_norm_distance(a: &QuantumState, b: &QuantumState) -> Result<f64, SimError> {
    let overlap = a.inner(b)?;
    let (na, nb) = (a.norm(), b.norm());
    let c = overlap / (na * na);
    let residual: f64 = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (y - c * x).norm_sqr())
        .sum();
    Ok((residual.sqrt() / nb).min(1.0))
}
