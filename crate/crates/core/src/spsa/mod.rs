//! Closed-loop schedule optimizer.
//!
//! Everything here sees the annealer as a black box that returns measured
//! bitstrings. Spectra, eigenvectors and the ground-state index are never
//! touched; those belong to [`crate::analyzer`].

mod config;
mod objective;
mod optimizer;

pub use config::{gains, SpsaConfig, DEFAULT_DELTA, DEFAULT_LAMBDA_AD, DEFAULT_ZETA};
pub use objective::{
    bitstring_costs, estimate_energy, Device, EnergyEstimate, Objective, SampledEnergy,
    ScheduleObjective, SimulatedDevice,
};
pub use optimizer::{
    calibrate_gains, calibrate_gains_with, optimize, optimize_schedule, rademacher,
    read_trajectory_csv, spsa_gradient, spsa_gradient_with, spsa_step, write_trajectory_csv,
    CalibratedGains, GainRule, GradientEstimate, OptimizeOutcome, ScheduleOutcome, Selected,
    SpsaState, TrajectoryRow,
};

use thiserror::Error;

use crate::qsim::SimError;
use crate::schedules::ScheduleError;

#[derive(Debug, Error)]
pub enum SpsaError {
    #[error("invalid SPSA settings: {0}")]
    Config(String),
    #[error("problem Hamiltonian is not diagonal in the computational basis")]
    NonDiagonalProblem,
    #[error("expected {expected} parameters, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("objective returned a non-finite value at iteration {k}")]
    NonFinite { k: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
