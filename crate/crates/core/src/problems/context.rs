use serde::{Deserialize, Serialize};

use super::{compile_2sat, grover_problem, initial_hamiltonian, intermediate_hamiltonian};
use super::{IntermediateKind, NoiseModel, ProblemError, ProblemInstance};
use crate::qsim::{AdiabaticHamiltonian, Channel, Operator, QuantumState};
use crate::schedules::{BoundaryConstraint, ControlSchedule, Controls, TabulatedSchedule};

/// Grover control layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroverControls {
    /// `x_2 = 1 − x_1`
    One,
    /// `x_1`, `x_2` independent.
    Two,
}

/// MAX 2-SAT control layouts over `(x_1, x_2, x_3, x_4) ↔ (H_0, H_I, H_P1, H_P2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// `x_2 = 0`, `x_3 = x_4 = 1 − x_1`.
    One,
    /// `x_2 = 0`, `x_3 = x_4`.
    Two,
    /// `x_3 = x_4`.
    Three,
    /// All four independent.
    Four,
}

impl Scenario {
    pub fn independent_controls(self) -> usize {
        u8::from(self) as usize
    }

    fn channels(self) -> [Channel; 4] {
        use Channel::*;
        match self {
            Scenario::One => [Control(0), Off, Complement(0), Complement(0)],
            Scenario::Two => [Control(0), Off, Control(1), Control(1)],
            Scenario::Three => [Control(0), Control(1), Control(2), Control(2)],
            Scenario::Four => [Control(0), Control(1), Control(2), Control(3)],
        }
    }

    /// Endpoint values of every independent control.
    fn endpoints(self) -> Vec<(f64, f64)> {
        let x1 = (1.0, 0.0);
        let xi = (0.0, 0.0);
        let xp = (0.0, 1.0);
        match self {
            Scenario::One => vec![x1],
            Scenario::Two => vec![x1, xp],
            Scenario::Three => vec![x1, xi, xp],
            Scenario::Four => vec![x1, xi, xp, xp],
        }
    }
}

impl TryFrom<u8> for Scenario {
    type Error = ProblemError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Scenario::One),
            2 => Ok(Scenario::Two),
            3 => Ok(Scenario::Three),
            4 => Ok(Scenario::Four),
            _ => Err(ProblemError::Size(format!(
                "control scenario must be 1..=4, got {v}"
            ))),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        match s {
            Scenario::One => 1,
            Scenario::Two => 2,
            Scenario::Three => 3,
            Scenario::Four => 4,
        }
    }
}

/// Everything needed to run the annealer for one problem: the controlled
/// Hamiltonian, the starting state, the problem Hamiltonian that is measured at
/// the end, and the constraint template for the optimizer's schedules.
#[derive(Debug, Clone)]
pub struct ProblemContext {
    hamiltonian: AdiabaticHamiltonian,
    physical: usize,
    template: ControlSchedule,
    initial: QuantumState,
    problem: Operator,
}

impl ProblemContext {
    pub fn grover(
        n: usize,
        marked: usize,
        controls: GroverControls,
        basis_size: usize,
    ) -> Result<Self, ProblemError> {
        let base = grover_problem(n, marked)?;
        let (channels, constraints) = match controls {
            GroverControls::One => (
                vec![Channel::Control(0), Channel::Complement(0)],
                endpoint_constraints(&[(1.0, 0.0)]),
            ),
            GroverControls::Two => (
                vec![Channel::Control(0), Channel::Control(1)],
                endpoint_constraints(&[(1.0, 0.0), (0.0, 1.0)]),
            ),
        };
        let problem = base.primitives()[1].clone();
        let hamiltonian = AdiabaticHamiltonian::new(base.primitives().to_vec(), channels)?;
        Ok(Self {
            physical: 2,
            template: ControlSchedule::template(
                hamiltonian.control_count(),
                basis_size,
                constraints,
            )?,
            hamiltonian,
            initial: QuantumState::uniform(n),
            problem,
        })
    }

    pub fn max2sat(
        instance: &ProblemInstance,
        scenario: Scenario,
        kind: IntermediateKind,
        basis_size: usize,
    ) -> Result<Self, ProblemError> {
        let n = instance.n;
        let (p1, p2) = compile_2sat(instance);
        let problem = p1.clone().plus(&p2)?;
        let primitives = vec![
            initial_hamiltonian(n)?,
            intermediate_hamiltonian(kind, n)?,
            p1,
            p2,
        ];
        let hamiltonian = AdiabaticHamiltonian::new(primitives, scenario.channels().to_vec())?;
        let constraints = endpoint_constraints(&scenario.endpoints());
        Ok(Self {
            physical: 4,
            template: ControlSchedule::template(
                hamiltonian.control_count(),
                basis_size,
                constraints,
            )?,
            hamiltonian,
            initial: QuantumState::uniform(n),
            problem,
        })
    }

    /// Adds the uncontrolled error term `Γ(s) Σ m̂_i·σ⃗_i`.
    pub fn with_noise(mut self, noise: &NoiseModel) -> Result<Self, ProblemError> {
        if noise.qubits() != self.qubits() {
            return Err(ProblemError::Size(format!(
                "noise model has {} qubits, problem has {}",
                noise.qubits(),
                self.qubits()
            )));
        }
        self.hamiltonian = self
            .hamiltonian
            .with_ramped_term(noise.operator(), noise.ramp)?;
        Ok(self)
    }

    pub fn qubits(&self) -> usize {
        self.initial.qubits()
    }

    pub fn hamiltonian(&self) -> &AdiabaticHamiltonian {
        &self.hamiltonian
    }

    /// Constraint template; its all-zero free point is the linear schedule.
    pub fn template(&self) -> &ControlSchedule {
        &self.template
    }

    pub fn linear_schedule(&self) -> ControlSchedule {
        self.template.clone()
    }

    pub fn initial_state(&self) -> &QuantumState {
        &self.initial
    }

    /// `H_P`, the Hamiltonian whose ground state encodes the answer.
    pub fn problem_hamiltonian(&self) -> &Operator {
        &self.problem
    }

    /// Number of controlled primitives (`x_1..x_L`), excluding any noise term.
    pub fn physical_channels(&self) -> usize {
        self.physical
    }

    /// The same device driven directly by `x_1..x_L`, for externally supplied
    /// reference paths.
    pub fn direct_hamiltonian(&self) -> AdiabaticHamiltonian {
        let channels = self
            .hamiltonian
            .channels()
            .iter()
            .enumerate()
            .map(|(l, ch)| match ch {
                Channel::Ramp(r) => Channel::Ramp(*r),
                _ => Channel::Control(l),
            })
            .collect();
        AdiabaticHamiltonian::new(self.hamiltonian.primitives().to_vec(), channels)
            .expect("same primitives")
    }

    /// `x_1..x_L` at `s` for a schedule over the independent controls.
    pub fn physical_values<C: Controls + ?Sized>(&self, controls: &C, s: f64) -> Vec<f64> {
        let mut x = self.hamiltonian.coefficients_at(controls, s);
        x.truncate(self.physical);
        x
    }

    /// Samples `x_1..x_L` on a uniform grid for export.
    pub fn physical_table<C: Controls + ?Sized>(
        &self,
        controls: &C,
        points: usize,
    ) -> TabulatedSchedule {
        TabulatedSchedule::sample(
            &PhysicalView {
                ctx: self,
                controls,
            },
            points,
        )
    }
}

struct PhysicalView<'a, C: ?Sized> {
    ctx: &'a ProblemContext,
    controls: &'a C,
}

impl<C: Controls + ?Sized> Controls for PhysicalView<'_, C> {
    fn channel_count(&self) -> usize {
        self.ctx.physical
    }

    fn values_into(&self, s: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.ctx.physical_values(self.controls, s));
    }
}

fn endpoint_constraints(ends: &[(f64, f64)]) -> Vec<BoundaryConstraint> {
    ends.iter()
        .enumerate()
        .flat_map(|(c, &(a, b))| {
            [
                BoundaryConstraint::start(c, a),
                BoundaryConstraint::end(c, b),
            ]
        })
        .collect()
}
