use serde::{Deserialize, Serialize};

use super::{Controls, ScheduleError};

/// Five coefficients per channel, i.e. polynomials up to degree four.
pub const DEFAULT_BASIS_SIZE: usize = 5;

/// Function basis for a channel expansion. Only monomials `s^j` exist today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[default]
    Monomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Start,
    End,
}

impl Endpoint {
    pub fn s(self) -> f64 {
        match self {
            Endpoint::Start => 0.0,
            Endpoint::End => 1.0,
        }
    }
}

/// `x_channel(endpoint) = value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstraint {
    pub channel: usize,
    pub endpoint: Endpoint,
    pub value: f64,
}

impl BoundaryConstraint {
    pub fn start(channel: usize, value: f64) -> Self {
        Self {
            channel,
            endpoint: Endpoint::Start,
            value,
        }
    }

    pub fn end(channel: usize, value: f64) -> Self {
        Self {
            channel,
            endpoint: Endpoint::End,
            value,
        }
    }
}

/// Slot bookkeeping for one channel: which coefficient is pinned by `x(0)`
/// and which absorbs `x(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ChannelSlots {
    start: Option<(usize, f64)>,
    end: Option<(usize, f64)>,
}

impl ChannelSlots {
    fn is_free(&self, slot: usize) -> bool {
        !matches!(self.start, Some((j, _)) if j == slot)
            && !matches!(self.end, Some((j, _)) if j == slot)
    }
}

/// Polynomial control schedule `x_i(s) = Σ_j α_ij s^j` with endpoint constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    channels: usize,
    basis_size: usize,
    #[serde(default)]
    basis: Basis,
    /// Row-major `channels × basis_size`.
    weights: Vec<f64>,
    constraints: Vec<BoundaryConstraint>,
    #[serde(skip)]
    slots: Vec<ChannelSlots>,
}

impl ControlSchedule {
    /// Builds the constraint template with every free coefficient set to zero.
    ///
    /// Because the `s = 1` constraint is absorbed by the linear coefficient,
    /// the all-zero free point of a doubly-constrained channel is the straight
    /// line through its endpoints.
    pub fn template(
        channels: usize,
        basis_size: usize,
        constraints: Vec<BoundaryConstraint>,
    ) -> Result<Self, ScheduleError> {
        let slots = plan_slots(channels, basis_size, &constraints)?;
        let mut schedule = Self {
            channels,
            basis_size,
            basis: Basis::Monomial,
            weights: vec![0.0; channels * basis_size],
            constraints,
            slots,
        };
        schedule.fill_constrained_slots();
        Ok(schedule)
    }

    /// Wraps explicit weights, checking that every constraint already holds.
    pub fn from_weights(
        channels: usize,
        basis_size: usize,
        weights: Vec<f64>,
        constraints: Vec<BoundaryConstraint>,
    ) -> Result<Self, ScheduleError> {
        if weights.len() != channels * basis_size {
            return Err(ScheduleError::WeightCount {
                expected: channels * basis_size,
                got: weights.len(),
            });
        }
        let slots = plan_slots(channels, basis_size, &constraints)?;
        let schedule = Self {
            channels,
            basis_size,
            basis: Basis::Monomial,
            weights,
            constraints,
            slots,
        };
        schedule.check_constraints(1e-12)?;
        Ok(schedule)
    }

    /// Re-derives slot bookkeeping after deserialization.
    pub fn validated(mut self) -> Result<Self, ScheduleError> {
        if self.weights.len() != self.channels * self.basis_size {
            return Err(ScheduleError::WeightCount {
                expected: self.channels * self.basis_size,
                got: self.weights.len(),
            });
        }
        self.slots = plan_slots(self.channels, self.basis_size, &self.constraints)?;
        self.check_constraints(1e-12)?;
        Ok(self)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn channel_weights(&self, channel: usize) -> &[f64] {
        &self.weights[channel * self.basis_size..(channel + 1) * self.basis_size]
    }

    pub fn constraints(&self) -> &[BoundaryConstraint] {
        &self.constraints
    }

    /// `x_channel(s)` by Horner's rule.
    pub fn value(&self, channel: usize, s: f64) -> f64 {
        horner(self.channel_weights(channel), s)
    }

    /// `dx_channel/ds`.
    pub fn derivative(&self, channel: usize, s: f64) -> f64 {
        let w = self.channel_weights(channel);
        let mut acc = 0.0;
        for j in (1..w.len()).rev() {
            acc = acc * s + j as f64 * w[j];
        }
        acc
    }

    /// `(channel, slot)` of every free coefficient, in parameter order.
    pub fn free_slots(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (channel, slots) in self.slots.iter().enumerate() {
            for slot in 0..self.basis_size {
                if slots.is_free(slot) {
                    out.push((channel, slot));
                }
            }
        }
        out
    }

    pub fn free_param_count(&self) -> usize {
        self.slots
            .iter()
            .map(|c| self.basis_size - c.start.is_some() as usize - c.end.is_some() as usize)
            .sum()
    }

    /// Current values of the free coefficients.
    pub fn free_params(&self) -> Vec<f64> {
        self.free_slots()
            .into_iter()
            .map(|(c, j)| self.weights[c * self.basis_size + j])
            .collect()
    }

    /// Replaces the free coefficients and re-solves the constrained slots.
    pub fn with_free_params(&self, free: &[f64]) -> Result<Self, ScheduleError> {
        let expected = self.free_param_count();
        if free.len() != expected {
            return Err(ScheduleError::FreeParamCount {
                expected,
                got: free.len(),
            });
        }
        let mut out = self.clone();
        for (&(c, j), &v) in self.free_slots().iter().zip(free) {
            out.weights[c * self.basis_size + j] = v;
        }
        out.fill_constrained_slots();
        Ok(out)
    }

    /// `∂α_{channel,slot}/∂free` for the coefficient absorbing `x(1)`: `-1`
    /// for every free slot on the same channel. Returns `None` when the
    /// channel has no end constraint.
    pub(crate) fn end_absorbing_slot(&self, channel: usize) -> Option<usize> {
        self.slots[channel].end.map(|(j, _)| j)
    }

    pub fn check_constraints(&self, tol: f64) -> Result<(), ScheduleError> {
        for bc in &self.constraints {
            let residual = (self.value(bc.channel, bc.endpoint.s()) - bc.value).abs();
            if !(residual < tol) {
                return Err(ScheduleError::ConstraintViolated {
                    channel: bc.channel,
                    endpoint: bc.endpoint,
                    residual,
                });
            }
        }
        Ok(())
    }

    fn fill_constrained_slots(&mut self) {
        let b = self.basis_size;
        for (c, slots) in self.slots.iter().enumerate() {
            let w = &mut self.weights[c * b..(c + 1) * b];
            if let Some((j, v)) = slots.start {
                w[j] = v;
            }
            if let Some((j, v)) = slots.end {
                let others: f64 = w
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, a)| a)
                    .sum();
                w[j] = v - others;
            }
        }
    }
}

impl Controls for ControlSchedule {
    fn channel_count(&self) -> usize {
        self.channels
    }

    fn values_into(&self, s: f64, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate().take(self.channels) {
            *o = self.value(c, s);
        }
    }
}

/// Straight line through each channel's endpoint values.
pub fn linear_schedule(
    channels: usize,
    basis_size: usize,
    constraints: Vec<BoundaryConstraint>,
) -> Result<ControlSchedule, ScheduleError> {
    for channel in 0..channels {
        for endpoint in [Endpoint::Start, Endpoint::End] {
            if !constraints
                .iter()
                .any(|bc| bc.channel == channel && bc.endpoint == endpoint)
            {
                return Err(ScheduleError::MissingEndpoint { channel, endpoint });
            }
        }
    }
    ControlSchedule::template(channels, basis_size, constraints)
}

pub(crate) fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn plan_slots(
    channels: usize,
    basis_size: usize,
    constraints: &[BoundaryConstraint],
) -> Result<Vec<ChannelSlots>, ScheduleError> {
    if basis_size == 0 {
        return Err(ScheduleError::EmptyBasis);
    }
    let mut start = vec![None; channels];
    let mut end = vec![None; channels];
    for bc in constraints {
        if bc.channel >= channels {
            return Err(ScheduleError::ChannelOutOfRange {
                channel: bc.channel,
                channels,
            });
        }
        let slot = match bc.endpoint {
            Endpoint::Start => &mut start[bc.channel],
            Endpoint::End => &mut end[bc.channel],
        };
        if slot.replace(bc.value).is_some() {
            return Err(ScheduleError::DuplicateConstraint {
                channel: bc.channel,
            });
        }
    }
    (0..channels)
        .map(|c| {
            let count = start[c].is_some() as usize + end[c].is_some() as usize;
            if count > basis_size {
                return Err(ScheduleError::OverDetermined {
                    channel: c,
                    constraints: count,
                    basis_size,
                });
            }
            // α_0 carries x(0); α_1 absorbs x(1) whenever it exists.
            let end_slot = if basis_size >= 2 { 1 } else { 0 };
            Ok(ChannelSlots {
                start: start[c].map(|v| (0, v)),
                end: end[c].map(|v| (end_slot, v)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_down() -> Vec<BoundaryConstraint> {
        vec![
            BoundaryConstraint::start(0, 1.0),
            BoundaryConstraint::end(0, 0.0),
        ]
    }

    #[test]
    fn eval_examples() {
        let lin =
            ControlSchedule::from_weights(1, 5, vec![1.0, -1.0, 0.0, 0.0, 0.0], vec![]).unwrap();
        assert!((lin.value(0, 0.3) - 0.7).abs() < 1e-15);
        let c = ControlSchedule::from_weights(1, 5, vec![2.5, 0.0, 0.0, 0.0, 0.0], vec![]).unwrap();
        for s in [0.0, 0.2, 0.77, 1.0] {
            assert_eq!(c.value(0, s), 2.5);
        }
        let sq =
            ControlSchedule::from_weights(1, 5, vec![0.0, 0.0, 1.0, 0.0, 0.0], vec![]).unwrap();
        assert!((sq.value(0, 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_free_point_is_linear_ramp() {
        let t = ControlSchedule::template(1, 5, ramp_down()).unwrap();
        assert_eq!(t.free_param_count(), 3);
        let s = t.with_free_params(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.weights(), &[1.0, -1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_constraints_give_zero_channel() {
        let t = ControlSchedule::template(
            1,
            5,
            vec![
                BoundaryConstraint::start(0, 0.0),
                BoundaryConstraint::end(0, 0.0),
            ],
        )
        .unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(t.value(0, s), 0.0);
        }
    }

    #[test]
    fn free_parameter_counting() {
        let bc = vec![
            BoundaryConstraint::start(0, 1.0),
            BoundaryConstraint::end(0, 0.0),
            BoundaryConstraint::start(1, 0.0),
            BoundaryConstraint::end(1, 1.0),
        ];
        let t = ControlSchedule::template(2, 5, bc).unwrap();
        assert_eq!(t.free_param_count(), 6);
        assert_eq!(t.free_params().len(), 6);
    }

    #[test]
    fn end_only_constraint_is_absorbed_by_linear_slot() {
        let t = ControlSchedule::template(1, 4, vec![BoundaryConstraint::end(0, 2.0)]).unwrap();
        assert_eq!(t.free_slots(), vec![(0, 0), (0, 2), (0, 3)]);
        let s = t.with_free_params(&[0.5, 1.0, -3.0]).unwrap();
        assert!((s.value(0, 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(s.value(0, 0.0), 0.5);
    }

    #[test]
    fn rejects_bad_constraints() {
        let dup = vec![
            BoundaryConstraint::start(0, 1.0),
            BoundaryConstraint::start(0, 0.0),
        ];
        assert!(matches!(
            ControlSchedule::template(1, 5, dup),
            Err(ScheduleError::DuplicateConstraint { channel: 0 })
        ));
        assert!(matches!(
            ControlSchedule::template(1, 1, ramp_down()),
            Err(ScheduleError::OverDetermined { .. })
        ));
        assert!(matches!(
            ControlSchedule::template(1, 5, vec![BoundaryConstraint::end(3, 0.0)]),
            Err(ScheduleError::ChannelOutOfRange { .. })
        ));
        let t = ControlSchedule::template(1, 5, ramp_down()).unwrap();
        assert!(matches!(
            t.with_free_params(&[0.0; 2]),
            Err(ScheduleError::FreeParamCount {
                expected: 3,
                got: 2
            })
        ));
        assert!(ControlSchedule::from_weights(1, 2, vec![1.0, 0.0], ramp_down()).is_err());
    }

    #[test]
    fn linear_schedule_channels() {
        let bc = vec![
            BoundaryConstraint::start(0, 1.0),
            BoundaryConstraint::end(0, 0.0),
            BoundaryConstraint::start(1, 0.0),
            BoundaryConstraint::end(1, 1.0),
            BoundaryConstraint::start(2, 0.0),
            BoundaryConstraint::end(2, 0.0),
        ];
        let lin = linear_schedule(3, 5, bc).unwrap();
        for s in [0.0, 0.25, 0.6, 1.0] {
            let v = lin.values_at(s);
            assert!((v[0] - (1.0 - s)).abs() < 1e-15);
            assert!((v[1] - s).abs() < 1e-15);
            assert_eq!(v[2], 0.0);
        }
        assert!(matches!(
            linear_schedule(1, 5, vec![BoundaryConstraint::start(0, 1.0)]),
            Err(ScheduleError::MissingEndpoint { .. })
        ));
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let s =
            ControlSchedule::from_weights(1, 5, vec![0.3, -1.2, 2.0, 0.7, -0.4], vec![]).unwrap();
        let h = 1e-6;
        for x in [0.1, 0.5, 0.9] {
            let fd = (s.value(0, x + h) - s.value(0, x - h)) / (2.0 * h);
            assert!((fd - s.derivative(0, x)).abs() < 1e-8);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn projection_preserves_constraints(
                free in proptest::collection::vec(-10.0f64..10.0, 9),
                v in proptest::collection::vec(-3.0f64..3.0, 4),
            ) {
                let bc = vec![
                    BoundaryConstraint::start(0, v[0]),
                    BoundaryConstraint::end(0, v[1]),
                    BoundaryConstraint::start(1, v[2]),
                    BoundaryConstraint::end(2, v[3]),
                ];
                let t = ControlSchedule::template(3, 4, bc).unwrap();
                prop_assert_eq!(t.free_param_count(), 8);
                let s = t.with_free_params(&free[..t.free_param_count()]).unwrap();
                prop_assert!(s.check_constraints(1e-12).is_ok());
            }

            #[test]
            fn horner_matches_power_sum(
                w in proptest::collection::vec(-10.0f64..10.0, 1..14),
                s in 0.0f64..=1.0,
            ) {
                let naive: f64 = w.iter().enumerate().map(|(j, a)| a * s.powi(j as i32)).sum();
                prop_assert!((horner(&w, s) - naive).abs() < 1e-12);
            }
        }
    }
}
