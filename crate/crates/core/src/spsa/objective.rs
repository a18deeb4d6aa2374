use super::SpsaError;
use crate::problems::ProblemContext;
use crate::qsim::{
    evolve, sample_measurements, AdiabaticHamiltonian, EvolutionConfig, Operator, QuantumState,
};
use crate::schedules::{grad_j_ad, ControlSchedule};

/// A quantum annealer seen from outside: run a schedule, get bitstrings.
pub trait Device {
    fn run(
        &self,
        schedule: &ControlSchedule,
        shots: usize,
        seed: u64,
    ) -> Result<Vec<usize>, SpsaError>;
}

/// Device backed by the state-vector simulator.
#[derive(Debug, Clone)]
pub struct SimulatedDevice {
    hamiltonian: AdiabaticHamiltonian,
    initial: QuantumState,
    evolution: EvolutionConfig,
}

impl SimulatedDevice {
    pub fn new(
        hamiltonian: AdiabaticHamiltonian,
        initial: QuantumState,
        evolution: EvolutionConfig,
    ) -> Self {
        Self {
            hamiltonian,
            initial,
            evolution,
        }
    }

    pub fn for_problem(ctx: &ProblemContext, evolution: EvolutionConfig) -> Self {
        Self::new(
            ctx.hamiltonian().clone(),
            ctx.initial_state().clone(),
            evolution,
        )
    }

    pub fn evolution(&self) -> &EvolutionConfig {
        &self.evolution
    }
}

impl Device for SimulatedDevice {
    fn run(
        &self,
        schedule: &ControlSchedule,
        shots: usize,
        seed: u64,
    ) -> Result<Vec<usize>, SpsaError> {
        let state = evolve(&self.hamiltonian, schedule, &self.evolution, &self.initial)?;
        Ok(sample_measurements(&state, shots, seed))
    }
}

/// `Ê(Λ)`: mean cost of `M` measured bitstrings.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub samples: usize,
    pub outcomes: Vec<usize>,
}

/// Diagonal of `H_P`, i.e. the classical cost of every bitstring.
pub fn bitstring_costs(problem: &Operator) -> Result<Vec<f64>, SpsaError> {
    problem
        .diagonal_entries()
        .ok_or(SpsaError::NonDiagonalProblem)
}

/// Sampled-energy estimator over any [`Device`].
#[derive(Debug, Clone)]
pub struct SampledEnergy<D> {
    device: D,
    costs: Vec<f64>,
}

impl<D: Device> SampledEnergy<D> {
    pub fn new(device: D, problem: &Operator) -> Result<Self, SpsaError> {
        Ok(Self {
            device,
            costs: bitstring_costs(problem)?,
        })
    }

    pub fn device(&self) -> &D {
        &self.device
    }

    pub fn estimate(
        &self,
        schedule: &ControlSchedule,
        samples: usize,
        seed: u64,
    ) -> Result<EnergyEstimate, SpsaError> {
        let outcomes = self.device.run(schedule, samples, seed)?;
        let value = outcomes.iter().map(|&z| self.costs[z]).sum::<f64>() / samples as f64;
        Ok(EnergyEstimate {
            value,
            samples,
            outcomes,
        })
    }
}

/// One-shot `Ê` for a schedule on a problem.
pub fn estimate_energy(
    schedule: &ControlSchedule,
    ctx: &ProblemContext,
    evolution: EvolutionConfig,
    samples: usize,
    seed: u64,
) -> Result<EnergyEstimate, SpsaError> {
    SampledEnergy::new(
        SimulatedDevice::for_problem(ctx, evolution),
        ctx.problem_hamiltonian(),
    )?
    .estimate(schedule, samples, seed)
}

/// Noisy scalar objective over a free-parameter vector, as the optimizer sees it.
pub trait Objective {
    fn dimension(&self) -> usize;

    /// One estimate from `samples` experiments.
    fn evaluate(&self, params: &[f64], samples: usize, seed: u64) -> Result<f64, SpsaError>;

    /// Gradient of the adiabaticity penalty; zero unless the parameters describe a schedule.
    fn penalty_gradient(&self, params: &[f64]) -> Result<Vec<f64>, SpsaError> {
        Ok(vec![0.0; params.len()])
    }
}

/// Free coefficients of a schedule template evaluated through a sampled energy.
#[derive(Debug, Clone)]
pub struct ScheduleObjective<D> {
    template: ControlSchedule,
    energy: SampledEnergy<D>,
}

impl<D: Device> ScheduleObjective<D> {
    pub fn new(template: ControlSchedule, energy: SampledEnergy<D>) -> Self {
        Self { template, energy }
    }

    pub fn template(&self) -> &ControlSchedule {
        &self.template
    }

    pub fn energy(&self) -> &SampledEnergy<D> {
        &self.energy
    }

    pub fn schedule(&self, params: &[f64]) -> Result<ControlSchedule, SpsaError> {
        Ok(self.template.with_free_params(params)?)
    }
}

impl ScheduleObjective<SimulatedDevice> {
    /// Sampled energy of `ctx` under its own constraint template.
    pub fn simulated(ctx: &ProblemContext, evolution: EvolutionConfig) -> Result<Self, SpsaError> {
        let energy = SampledEnergy::new(
            SimulatedDevice::for_problem(ctx, evolution),
            ctx.problem_hamiltonian(),
        )?;
        Ok(Self::new(ctx.template().clone(), energy))
    }
}

impl<D: Device> Objective for ScheduleObjective<D> {
    fn dimension(&self) -> usize {
        self.template.free_param_count()
    }

    fn evaluate(&self, params: &[f64], samples: usize, seed: u64) -> Result<f64, SpsaError> {
        Ok(self
            .energy
            .estimate(&self.schedule(params)?, samples, seed)?
            .value)
    }

    fn penalty_gradient(&self, params: &[f64]) -> Result<Vec<f64>, SpsaError> {
        Ok(grad_j_ad(&self.schedule(params)?))
    }
}
