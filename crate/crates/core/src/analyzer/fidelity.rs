use serde::{Deserialize, Serialize};

use super::AnalyzerError;
use crate::qsim::{
    evolve_certified, instantaneous_spectrum, sample_measurements, trace_norm_distance,
    AdiabaticHamiltonian, EvolutionConfig, Method, Operator, QuantumState,
};
use crate::schedules::Controls;

/// How the analyzer integrates: a method, a starting grid and the doubling
/// tolerance that certifies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPolicy {
    pub method: Method,
    pub start_steps: usize,
    pub tol: f64,
}

impl Default for EvolutionPolicy {
    fn default() -> Self {
        Self {
            method: Method::Magnus4,
            start_steps: 32,
            tol: 1e-7,
        }
    }
}

/// `ψ(T)` on a step-doubling certified grid; also returns that grid size.
pub fn final_state<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    initial: &QuantumState,
    total_time: f64,
    policy: &EvolutionPolicy,
) -> Result<(QuantumState, usize), AnalyzerError> {
    let cfg = EvolutionConfig::new(total_time, policy.start_steps, policy.method)?;
    Ok(evolve_certified(h, controls, &cfg, initial, policy.tol)?)
}

/// Nondegenerate ground state `Φ_0` of `H_P`.
pub fn ground_state(problem: &Operator) -> Result<QuantumState, AnalyzerError> {
    let spec = instantaneous_spectrum(problem, 2);
    let degeneracy = spec.ground_degeneracy();
    if degeneracy > 1 {
        return Err(AnalyzerError::DegenerateGround { degeneracy });
    }
    Ok(spec.vectors[0].clone())
}

/// `D = ‖Φ_0 − ψ‖_tr` for pure states.
pub fn adiabatic_error(
    final_state: &QuantumState,
    problem: &Operator,
) -> Result<f64, AnalyzerError> {
    Ok(trace_norm_distance(&ground_state(problem)?, final_state)?)
}

/// `|⟨Φ_0|ψ⟩|²`.
pub fn ground_state_probability(
    final_state: &QuantumState,
    problem: &Operator,
) -> Result<f64, AnalyzerError> {
    Ok(ground_state(problem)?.inner(final_state)?.norm_sqr())
}

/// Fraction of `samples` computational-basis draws that land on the ground
/// bitstring; `H_P` must be diagonal so that `Φ_0` is a basis state.
pub fn sampled_ground_state_probability(
    final_state: &QuantumState,
    problem: &Operator,
    samples: usize,
    seed: u64,
) -> Result<f64, AnalyzerError> {
    let ground = ground_state(problem)?;
    let target = ground
        .probabilities()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty state");
    let hits = sample_measurements(final_state, samples, seed)
        .into_iter()
        .filter(|&z| z == target)
        .count();
    Ok(hits as f64 / samples as f64)
}
