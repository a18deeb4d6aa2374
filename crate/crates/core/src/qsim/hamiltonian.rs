use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Operator, SimError};
use crate::schedules::Controls;

/// Time profile of an uncontrolled term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampKind {
    /// `C s`
    Linear,
    /// `C sin(π s)`
    Sine,
    /// `½ sin(C π s)`
    FastSine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub kind: RampKind,
    pub c: f64,
}

impl Ramp {
    pub fn value(&self, s: f64) -> f64 {
        use std::f64::consts::PI;
        match self.kind {
            RampKind::Linear => self.c * s,
            RampKind::Sine => self.c * (PI * s).sin(),
            RampKind::FastSine => 0.5 * (self.c * PI * s).sin(),
        }
    }
}

/// How a primitive's coefficient is obtained from the independent controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// `x_l(s) = y_k(s)`
    Control(usize),
    /// `x_l(s) = 1 − y_k(s)`
    Complement(usize),
    /// Fixed profile outside the optimizer's reach.
    Ramp(Ramp),
    /// Primitive switched off.
    Off,
}

/// `H_ad(s) = Σ_l x_l(s) H_l`.
#[derive(Debug, Clone)]
pub struct AdiabaticHamiltonian {
    primitives: Vec<Operator>,
    channels: Vec<Channel>,
}

impl AdiabaticHamiltonian {
    pub fn new(primitives: Vec<Operator>, channels: Vec<Channel>) -> Result<Self, SimError> {
        if primitives.is_empty() || primitives.len() != channels.len() {
            return Err(SimError::ChannelMismatch {
                expected: primitives.len(),
                got: channels.len(),
            });
        }
        let n = primitives[0].qubits();
        if let Some(p) = primitives.iter().find(|p| p.qubits() != n) {
            return Err(SimError::DimensionMismatch {
                expected: 1 << n,
                got: p.dim(),
            });
        }
        Ok(Self {
            primitives,
            channels,
        })
    }

    /// Adds an uncontrolled term `Γ(s)·op`.
    pub fn with_ramped_term(mut self, op: Operator, ramp: Ramp) -> Result<Self, SimError> {
        if op.qubits() != self.qubits() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                got: op.dim(),
            });
        }
        self.primitives.push(op);
        self.channels.push(Channel::Ramp(ramp));
        Ok(self)
    }

    pub fn qubits(&self) -> usize {
        self.primitives[0].qubits()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }

    pub fn primitives(&self) -> &[Operator] {
        &self.primitives
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Number of independent controls the channels refer to.
    pub fn control_count(&self) -> usize {
        self.channels
            .iter()
            .filter_map(|c| match c {
                Channel::Control(k) | Channel::Complement(k) => Some(k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn check_controls<C: Controls + ?Sized>(&self, controls: &C) -> Result<(), SimError> {
        if controls.channel_count() != self.control_count() {
            return Err(SimError::ChannelMismatch {
                expected: self.control_count(),
                got: controls.channel_count(),
            });
        }
        Ok(())
    }

    /// Per-primitive coefficients `x_l(s)` given control values `y(s)`.
    pub fn coefficients_into(&self, controls: &[f64], s: f64, out: &mut [f64]) {
        for (o, ch) in out.iter_mut().zip(&self.channels) {
            *o = match *ch {
                Channel::Control(k) => controls[k],
                Channel::Complement(k) => 1.0 - controls[k],
                Channel::Ramp(r) => r.value(s),
                Channel::Off => 0.0,
            };
        }
    }

    /// Per-primitive coefficients at `s` for a control source.
    pub fn coefficients_at<C: Controls + ?Sized>(&self, controls: &C, s: f64) -> Vec<f64> {
        let y = controls.values_at(s);
        let mut out = vec![0.0; self.primitives.len()];
        self.coefficients_into(&y, s, &mut out);
        out
    }

    /// `out = scale · Σ_l coeffs_l H_l ψ`. Zero coefficients are skipped.
    pub(crate) fn apply_into(&self, coeffs: &[f64], scale: f64, psi: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for (p, &c) in self.primitives.iter().zip(coeffs) {
            if c != 0.0 {
                p.apply_add(scale * c, psi, out);
            }
        }
    }

    pub fn operator_for(&self, coeffs: &[f64]) -> Operator {
        Operator::linear_combination(self.qubits(), coeffs.iter().copied().zip(&self.primitives))
            .expect("primitives share one qubit count")
    }

    /// Bound on `max_s ‖H_ad(s)‖` sampled on a uniform grid.
    pub fn norm_bound_along<C: Controls + ?Sized>(&self, controls: &C, grid: usize) -> f64 {
        let norms: Vec<f64> = self.primitives.iter().map(Operator::norm_bound).collect();
        let mut y = vec![0.0; controls.channel_count()];
        let mut x = vec![0.0; self.primitives.len()];
        (0..=grid)
            .map(|i| {
                let s = i as f64 / grid as f64;
                controls.values_into(s, &mut y);
                self.coefficients_into(&y, s, &mut x);
                x.iter().zip(&norms).map(|(c, n)| c.abs() * n).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// `H_ad(s)` for a given schedule.
pub fn hamiltonian_at<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    s: f64,
) -> Result<Operator, SimError> {
    h.check_controls(controls)?;
    Ok(h.operator_for(&h.coefficients_at(controls, s)))
}
