//! Problem builders: Grover search, unique-solution MAX 2-SAT, driver
//! Hamiltonians and the unitary control-error model.
//!
//! Boolean convention: `x_j = true` is the `σ^z_j = +1` eigenstate, i.e. bit 0
//! of qubit `j` in the basis index.

mod context;
mod hamiltonians;
mod max2sat;
mod noise;

pub use context::{GroverControls, ProblemContext, Scenario};
pub use hamiltonians::{
    grover_problem, initial_hamiltonian, intermediate_hamiltonian, IntermediateKind,
};
pub use max2sat::{
    compile_2sat, generate_usa_instance, value_of, Clause, Literal, ProblemInstance,
    DEFAULT_RETRY_BUDGET,
};
pub use noise::{noise_hamiltonian_at, NoiseModel};

use thiserror::Error;

use crate::qsim::SimError;
use crate::schedules::ScheduleError;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Size(String),
    #[error("invalid clause: {0}")]
    InvalidClause(String),
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
    #[error(
        "no unique-solution instance for n = {n} (seed {seed}) within {retry_budget} restarts"
    )]
    RetryBudget {
        n: usize,
        seed: u64,
        retry_budget: usize,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
