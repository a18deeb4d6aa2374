//! Dense state-vector simulation of small spin systems.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index.
//! `σ^z` has eigenvalue `+1` on `|0⟩`.

mod evolution;
mod hamiltonian;
mod krylov;
mod measure;
mod operator;
mod spectrum;
mod state;


pub use evolution::{
    certify_steps, evolve, evolve_certified, evolve_checked, evolve_observed, step_doubling_change,
    EvolutionConfig, Method, MAX_CERTIFIED_STEPS, MIN_STEPS,
};
pub use hamiltonian::{hamiltonian_at, AdiabaticHamiltonian, Channel, Ramp, RampKind};
pub use measure::{sample_measurements, sample_with};
pub use operator::{Axis, Operator};
pub use spectrum::{eigenvalues, instantaneous_spectrum, Spectrum, DEGENERACY_TOL};
pub use state::{trace_norm_distance, QuantumState};

use thiserror::Error;

/// Builds `⊗ σ` over the listed `(qubit, axis)` factors.
pub fn assemble_pauli_term(n: usize, factors: &[(usize, Axis)]) -> Result<Operator, SimError> {
    Operator::pauli_term(n, factors)
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {qubit} appears twice in one Pauli term")]
    DuplicateQubit { qubit: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("channel count mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("invalid evolution settings: {0}")]
    InvalidEvolution(String),
    #[error("{steps} steps are too few: doubling changed the final overlap by {change:e}")]
    StepsTooSmall { steps: usize, change: f64 },
}
