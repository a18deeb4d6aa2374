//! Experiment orchestration: configs, seeded ensembles, sweeps and the files
//! they leave behind.
//!
//! Realization `i` of a run uses `realization_seed(master_seed, i)`; every
//! random stream inside it (pilot, SPSA perturbations, measurements, re-scoring)
//! is derived from that seed, so a record's config reproduces its numbers
//! exactly regardless of how many worker threads ran it.

mod compare;
mod config;
mod instances;
mod persist;
mod run;
mod sweeps;

pub use compare::{compare, BaselineSpec, ComparisonRow, ComparisonTable};
pub use config::{
    ConfigIssue, EvolutionSpec, ExperimentConfig, InstanceSource, NoiseSpec, ProblemSpec,
    RuntimeSpec, ScheduleSpec, SpsaSpec,
};
pub use instances::{generate_instances, DensitySummary, GeneratedInstance};
pub use persist::{load_record, write_run, SCHEDULE_GRID};
pub use run::{
    ensemble_summary, prepare, run_experiment, run_prepared, Checkpoint, EnsembleSummary, Prepared,
    RealizationRecord, RunRecord, WallClock,
};
pub use sweeps::{
    noise_sweep, runtime_sweep, write_rows_csv, NoiseSweepRow, RuntimeSweepRow, RuntimeUnit,
};

use thiserror::Error;

use crate::analyzer::AnalyzerError;
use crate::problems::ProblemError;
use crate::qsim::SimError;
use crate::schedules::ScheduleError;
use crate::spsa::SpsaError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(ConfigIssue),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Spsa(#[from] SpsaError),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        HarnessError::Config(ConfigIssue {
            line: None,
            message: message.into(),
        })
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
