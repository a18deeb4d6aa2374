use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, NoiseSpec, RuntimeSpec};
use super::run::{lower_median, prepare, run_prepared};
use super::HarnessError;
use crate::analyzer::{gap_scan, ground_state, DEFAULT_GAP_GRID};
use crate::qsim::RampKind;
use crate::schedules::local_adiabatic_schedule;

const LOCAL_ADIABATIC_KNOTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepRow {
    pub kind: RampKind,
    pub strength: f64,
    #[serde(rename = "D_cloaqc_median")]
    pub d_cloaqc: f64,
    #[serde(rename = "D_linear")]
    pub d_linear: f64,
    /// Local-adiabatic clock designed on the noiseless gap, run on the noisy device.
    #[serde(rename = "D_local_adiabatic")]
    pub d_local_adiabatic: f64,
    #[serde(rename = "P_E0_lin")]
    pub p_linear: f64,
    #[serde(rename = "P_E0_median")]
    pub p_median: f64,
    /// Sampled `P(E_0)` of the linear schedule before optimizing.
    pub pilot_probability: f64,
    pub ground_unsampled: bool,
}

/// For every `(kind, C)`: optimize under that noise realization and compare
/// the median `D` with the linear and local-adiabatic schedules on the same
/// noisy device. `T` always comes from the noiseless problem.
pub fn noise_sweep(
    config: &ExperimentConfig,
    kinds: &[RampKind],
    strengths: &[f64],
    noise_seed: u64,
    jobs: usize,
    mut on_row: impl FnMut(&NoiseSweepRow),
) -> Result<Vec<NoiseSweepRow>, HarnessError> {
    let mut rows = Vec::new();
    for &kind in kinds {
        for &strength in strengths {
            let mut cfg = config.clone();
            cfg.noise = Some(NoiseSpec {
                kind,
                strength,
                seed: noise_seed,
            });
            let prepared = prepare(&cfg)?;
            let record = run_prepared(&prepared, jobs, &|_| {})?;
            let linear = prepared.clean.linear_schedule();
            let gap = gap_scan(prepared.clean.hamiltonian(), &linear, DEFAULT_GAP_GRID)?;
            let clock = local_adiabatic_schedule(&gap.grid, LOCAL_ADIABATIC_KNOTS)?;
            let row = NoiseSweepRow {
                kind,
                strength,
                d_cloaqc: record.report.d_cloaqc,
                d_linear: prepared.baseline.adiabatic_error,
                d_local_adiabatic: prepared.adiabatic_error_of(&clock.compose(linear))?,
                p_linear: prepared.baseline.probability,
                p_median: record.report.p_median,
                pilot_probability: record.pilot_probability,
                ground_unsampled: record.ground_unsampled,
            };
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeUnit {
    /// `T` as given.
    Absolute,
    /// `T` in units of `1/Δ_min` of the linear schedule.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeSweepRow {
    #[serde(rename = "T")]
    pub total_time: f64,
    /// `T·Δ_min` of the linear schedule.
    #[serde(rename = "T_delta")]
    pub t_delta: f64,
    #[serde(rename = "P_E0_lin")]
    pub p_linear: f64,
    #[serde(rename = "P_E0_median")]
    pub p_median: f64,
    #[serde(rename = "D_lin")]
    pub d_linear: f64,
    #[serde(rename = "D_median")]
    pub d_median: f64,
}

/// Linear-start and optimized `P(E_0)` for each runtime. A leading `T = 0`
/// row gives the sudden limit `|⟨Φ_0|ψ_0⟩|²`, which no schedule can change.
pub fn runtime_sweep(
    config: &ExperimentConfig,
    times: &[f64],
    unit: RuntimeUnit,
    jobs: usize,
    mut on_row: impl FnMut(&RuntimeSweepRow),
) -> Result<Vec<RuntimeSweepRow>, HarnessError> {
    if times.is_empty() || times.windows(2).any(|w| !(w[0] < w[1])) || !(times[0] > 0.0) {
        return Err(HarnessError::config(
            "runtime grid must be positive and strictly ascending",
        ));
    }
    let mut cfg = config.clone();
    cfg.runtime = RuntimeSpec::GapUnits { t_delta: 1.0 };
    let probe = prepare(&cfg)?;
    let linear = probe.clean.linear_schedule();
    let delta_min = gap_scan(probe.clean.hamiltonian(), &linear, DEFAULT_GAP_GRID)?.delta_min;

    let ground = ground_state(probe.context.problem_hamiltonian())?;
    let p0 = ground.inner(probe.context.initial_state())?.norm_sqr();
    let sudden = RuntimeSweepRow {
        total_time: 0.0,
        t_delta: 0.0,
        p_linear: p0,
        p_median: p0,
        d_linear: (1.0 - p0).max(0.0).sqrt(),
        d_median: (1.0 - p0).max(0.0).sqrt(),
    };
    on_row(&sudden);
    let mut rows = vec![sudden];
    for &t in times {
        let total_time = match unit {
            RuntimeUnit::Absolute => t,
            RuntimeUnit::Gap => t / delta_min,
        };
        cfg.runtime = RuntimeSpec::Explicit { total_time };
        let prepared = prepare(&cfg)?;
        let record = run_prepared(&prepared, jobs, &|_| {})?;
        let ds: Vec<f64> = record
            .realizations
            .iter()
            .map(|r| r.adiabatic_error)
            .collect();
        let row = RuntimeSweepRow {
            total_time,
            t_delta: total_time * delta_min,
            p_linear: prepared.baseline.probability,
            p_median: record.report.p_median,
            d_linear: prepared.baseline.adiabatic_error,
            d_median: lower_median(&ds),
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_rows_csv<W: Write, R: Serialize>(rows: &[R], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
        .map_err(|e| HarnessError::io(std::path::Path::new("<csv>"), e))?;
    Ok(())
}
