//! White-box evaluation: spectra, adiabatic error, ground-state probability,
//! runtime calibration and ensemble reports.
//!
//! Unlike [`crate::spsa`], everything here may look at eigenvectors and gaps.

mod calibrate;
mod fidelity;
mod gap;
mod report;

pub use calibrate::{calibrate_runtime, Calibration, CalibrationScan};
pub use fidelity::{
    adiabatic_error, final_state, ground_state, ground_state_probability,
    sampled_ground_state_probability, EvolutionPolicy,
};
pub use gap::{gap_scan, GapScan, DEFAULT_GAP_GRID, MIN_GAP_GRID};
pub use report::{
    lower_median_index, performance_report, quartiles, Baseline, PerformanceReport,
    RealizationResult,
};

use thiserror::Error;

use crate::qsim::SimError;

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("ground state of H_P is {degeneracy}-fold degenerate")]
    DegenerateGround { degeneracy: usize },
    #[error("gap grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("target probability must lie in (0, 1), got {0}")]
    InvalidTarget(f64),
    #[error(
        "P(E_0) = {target} is not reached between T = {t_min} and T = {t_max} (max seen {best})"
    )]
    Unreachable {
        target: f64,
        t_min: f64,
        t_max: f64,
        best: f64,
    },
    #[error(
        "P(E_0) = {p} already exceeds the target {target} at the shortest scanned T = {t_min}"
    )]
    AboveTargetAtStart { target: f64, p: f64, t_min: f64 },
    #[error("minimum gap vanishes, so runtimes in units of 1/Δ are undefined")]
    ClosedGap,
    #[error("a report needs at least one realization")]
    NoRealizations,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
