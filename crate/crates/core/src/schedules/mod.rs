//! Control schedules on normalized time `s ∈ [0, 1]`.
//!
//! A [`ControlSchedule`] expands every independent control channel in the
//! monomial basis `φ_j(s) = s^j`. Boundary conditions are eliminated
//! variables: the optimizer only ever sees the free (interior) coefficients
//! and [`ControlSchedule::with_free_params`] fills the constrained slots, so
//! no parameter vector can produce a schedule that violates its endpoints.

mod local_adiabatic;
mod penalty;
mod polynomial;
mod tabulated;

pub use local_adiabatic::{local_adiabatic_schedule, Reparametrization, Reparametrized};
pub use penalty::{grad_j_ad, j_ad, DEFAULT_BRACKET_POINTS};
pub use polynomial::{
    linear_schedule, Basis, BoundaryConstraint, ControlSchedule, Endpoint, DEFAULT_BASIS_SIZE,
};
pub use tabulated::TabulatedSchedule;

use thiserror::Error;

/// Anything that can produce control values `x_i(s)` for every channel.
pub trait Controls {
    fn channel_count(&self) -> usize;

    /// Writes `x_i(s)` into `out`, which has length [`Controls::channel_count`].
    fn values_into(&self, s: f64, out: &mut [f64]);

    fn values_at(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.channel_count()];
        self.values_into(s, &mut out);
        out
    }
}

impl<C: Controls + ?Sized> Controls for &C {
    fn channel_count(&self) -> usize {
        (**self).channel_count()
    }

    fn values_into(&self, s: f64, out: &mut [f64]) {
        (**self).values_into(s, out)
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("constraint refers to channel {channel} but the schedule has {channels} channels")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("channel {channel} has more than one constraint at the same endpoint")]
    DuplicateConstraint { channel: usize },
    #[error("channel {channel}: {constraints} constraints cannot be met with {basis_size} basis functions")]
    OverDetermined {
        channel: usize,
        constraints: usize,
        basis_size: usize,
    },
    #[error("channel {channel} has no value at the {endpoint:?} endpoint")]
    MissingEndpoint { channel: usize, endpoint: Endpoint },
    #[error("expected {expected} free parameters, got {got}")]
    FreeParamCount { expected: usize, got: usize },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("channel {channel} violates its boundary constraint at {endpoint:?} by {residual:e}")]
    ConstraintViolated {
        channel: usize,
        endpoint: Endpoint,
        residual: f64,
    },
    #[error("basis size must be at least 1")]
    EmptyBasis,
    #[error("tabulated schedule: {0}")]
    Table(String),
    #[error("gap sample at s = {s} is not positive ({gap})")]
    NonPositiveGap { s: f64, gap: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
