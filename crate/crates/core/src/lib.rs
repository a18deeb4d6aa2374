//! Closed-loop optimized adiabatic quantum control.
//!
//! Small spin systems are simulated exactly on a dense state vector while
//! SPSA tunes polynomial control schedules using nothing but sampled
//! end-of-run energies. The white-box [`analyzer`] then measures what the
//! optimizer could not see: adiabatic error, spectral gaps and ground-state
//! probability.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyzer;
pub mod harness;
pub mod problems;
pub mod qsim;
pub mod schedules;
pub mod seeds;
pub mod spsa;
