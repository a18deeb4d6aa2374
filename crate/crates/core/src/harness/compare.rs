use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::run::{lower_median, Prepared, RunRecord};
use super::HarnessError;
use crate::analyzer::{gap_scan, quartiles, DEFAULT_GAP_GRID};
use crate::schedules::{local_adiabatic_schedule, Controls, TabulatedSchedule};

/// Knots of the local-adiabatic clock table.
const LOCAL_ADIABATIC_KNOTS: usize = 2001;

/// What an optimized record is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineSpec {
    Linear,
    /// Linear path on the `1/Δ²` clock of its own gap.
    LocalAdiabatic,
    /// Physical controls `x_1..x_L` from a schedule CSV.
    Table(PathBuf),
    /// Another run on the same problem and runtime, paired by realization.
    Record(Box<RunRecord>),
}

impl BaselineSpec {
    pub fn label(&self) -> String {
        match self {
            BaselineSpec::Linear => "linear".into(),
            BaselineSpec::LocalAdiabatic => "local_adiabatic".into(),
            BaselineSpec::Table(p) => format!("table:{}", p.display()),
            BaselineSpec::Record(r) => format!("record:{}", &r.config_hash[..12]),
        }
    }
}

/// Relative differences `(D_cloaqc − D_ref)/D_ref` over realizations at one
/// checkpoint; `k = None` is the selected (re-scored) schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub k: Option<usize>,
    pub median_relative: f64,
    pub q1_relative: f64,
    pub q3_relative: f64,
    /// Median of `D_ref / D_cloaqc`.
    pub median_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub baseline: String,
    /// `D` of a fixed reference; `None` for paired record baselines.
    pub reference_d: Option<f64>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "baseline",
            "k",
            "median_rel_diff",
            "q1_rel_diff",
            "q3_rel_diff",
            "median_ratio",
        ])?;
        for r in &self.rows {
            let k = r.k.map_or_else(|| "final".to_string(), |k| k.to_string());
            w.write_record([
                self.baseline.clone(),
                k,
                r.median_relative.to_string(),
                r.q1_relative.to_string(),
                r.q3_relative.to_string(),
                r.median_ratio.to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| HarnessError::io(std::path::Path::new("<csv>"), e))?;
        Ok(())
    }
}

fn row(k: Option<usize>, pairs: &[(f64, f64)]) -> ComparisonRow {
    let rel: Vec<f64> = pairs.iter().map(|(d, r)| (d - r) / r).collect();
    let ratio: Vec<f64> = pairs.iter().map(|(d, r)| r / d).collect();
    let (q1, q3) = quartiles(&rel);
    ComparisonRow {
        k,
        median_relative: lower_median(&rel),
        q1_relative: q1,
        q3_relative: q3,
        median_ratio: lower_median(&ratio),
    }
}

/// Compares `record` (prepared as `prepared`) against `baseline`.
pub fn compare(
    record: &RunRecord,
    prepared: &Prepared,
    baseline: &BaselineSpec,
) -> Result<ComparisonTable, HarnessError> {
    if record.problem_hash != prepared.problem_hash || record.total_time != prepared.total_time {
        return Err(HarnessError::Mismatch(
            "record does not match its own config; was it produced by a different version?".into(),
        ));
    }
    let reference = match baseline {
        BaselineSpec::Linear => Some(prepared.baseline.adiabatic_error),
        BaselineSpec::LocalAdiabatic => {
            let linear = prepared.context.linear_schedule();
            let gap = gap_scan(prepared.context.hamiltonian(), &linear, DEFAULT_GAP_GRID)?;
            let clock = local_adiabatic_schedule(&gap.grid, LOCAL_ADIABATIC_KNOTS)?;
            Some(prepared.adiabatic_error_of(&clock.compose(linear))?)
        }
        BaselineSpec::Table(path) => {
            let table = TabulatedSchedule::load(path)?;
            if table.channel_count() != prepared.context.physical_channels() {
                return Err(HarnessError::Mismatch(format!(
                    "{} has {} control columns, the problem has {}",
                    path.display(),
                    table.channel_count(),
                    prepared.context.physical_channels()
                )));
            }
            Some(prepared.adiabatic_error_with(&prepared.context.direct_hamiltonian(), &table)?)
        }
        BaselineSpec::Record(other) => {
            if other.problem_hash != record.problem_hash {
                return Err(HarnessError::Mismatch(format!(
                    "problem hash {} differs from {}",
                    &other.problem_hash[..12],
                    &record.problem_hash[..12]
                )));
            }
            if other.total_time != record.total_time {
                return Err(HarnessError::Mismatch(format!(
                    "runtime {} differs from {}",
                    other.total_time, record.total_time
                )));
            }
            if other.realizations.len() != record.realizations.len() {
                return Err(HarnessError::Mismatch(
                    "records have different realization counts".into(),
                ));
            }
            None
        }
    };
    let mut rows = Vec::new();
    let checkpoints = record
        .realizations
        .first()
        .map_or(0, |r| r.checkpoints.len());
    for i in 0..checkpoints {
        let k = record.realizations[0].checkpoints[i].k;
        let pairs: Option<Vec<(f64, f64)>> = record
            .realizations
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let d = r.checkpoints.get(i)?.adiabatic_error;
                let d_ref = match (&reference, baseline) {
                    (Some(v), _) => *v,
                    (None, BaselineSpec::Record(other)) => {
                        other.realizations[j]
                            .checkpoints
                            .iter()
                            .find(|c| c.k == k)?
                            .adiabatic_error
                    }
                    (None, _) => unreachable!("only record baselines are paired"),
                };
                Some((d, d_ref))
            })
            .collect();
        if let Some(pairs) = pairs {
            rows.push(row(Some(k), &pairs));
        }
    }
    let finals: Vec<(f64, f64)> = record
        .realizations
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let d_ref = match (&reference, baseline) {
                (Some(v), _) => *v,
                (None, BaselineSpec::Record(other)) => other.realizations[j].adiabatic_error,
                (None, _) => unreachable!("only record baselines are paired"),
            };
            (r.adiabatic_error, d_ref)
        })
        .collect();
    rows.push(row(None, &finals));
    Ok(ComparisonTable {
        baseline: baseline.label(),
        reference_d: reference,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, write_run, ExperimentConfig};

    fn grover() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
master_seed = 5
realizations = 3
[problem]
kind = "grover"
n = 3
marked = 6
[runtime]
mode = "explicit"
total_time = 6.0
[spsa]
K = 40
M = 50
beta0 = 0.4
"#,
        )
        .unwrap()
    }

    #[test]
    fn own_record_is_zero_difference() {
        let (prepared, record) = run_experiment(&grover(), 1).unwrap();
        let table = compare(
            &record,
            &prepared,
            &BaselineSpec::Record(Box::new(record.clone())),
        )
        .unwrap();
        for r in &table.rows {
            assert_eq!(r.median_relative, 0.0);
            assert_eq!((r.q1_relative, r.q3_relative), (0.0, 0.0));
            assert_eq!(r.median_ratio, 1.0);
        }
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.lines().last().unwrap().contains(",final,"));
    }

    #[test]
    fn linear_baseline_agrees_with_direct_simulation() {
        let (prepared, record) = run_experiment(&grover(), 1).unwrap();
        let table = compare(&record, &prepared, &BaselineSpec::Linear).unwrap();
        let d_lin = prepared
            .adiabatic_error_of(&prepared.context.linear_schedule())
            .unwrap();
        assert_eq!(table.reference_d, Some(d_lin));
        // k = 0 is the linear start itself
        assert_eq!(table.rows[0].median_relative, 0.0);
        let last = table.rows.last().unwrap();
        let ds: Vec<f64> = record
            .realizations
            .iter()
            .map(|r| r.adiabatic_error)
            .collect();
        let expect = lower_median(&ds.iter().map(|d| (d - d_lin) / d_lin).collect::<Vec<_>>());
        assert_eq!(last.median_relative, expect);
    }

    #[test]
    fn tabulated_reference_of_the_linear_path() {
        let dir = tempfile::tempdir().unwrap();
        let (prepared, record) = run_experiment(&grover(), 1).unwrap();
        write_run(&prepared, &record, dir.path()).unwrap();
        let path = dir.path().join("schedules/linear.csv");
        let table = TabulatedSchedule::load(&path).unwrap();
        for (s, row) in table.knots().iter().zip(table.rows()) {
            assert_eq!(&table.values_at(*s), row);
        }
        let cmp = compare(&record, &prepared, &BaselineSpec::Table(path)).unwrap();
        // the linear path is reproduced exactly by linear interpolation
        let d = cmp.reference_d.unwrap();
        assert!((d - prepared.baseline.adiabatic_error).abs() < 1e-6, "{d}");
    }

    #[test]
    fn mismatched_problems_are_rejected() {
        let (prepared, record) = run_experiment(&grover(), 1).unwrap();
        let mut other_cfg = grover();
        other_cfg.problem = crate::harness::ProblemSpec::Grover {
            n: 3,
            marked: 1,
            controls: crate::problems::GroverControls::One,
        };
        let (_, other) = run_experiment(&other_cfg, 1).unwrap();
        assert!(matches!(
            compare(&record, &prepared, &BaselineSpec::Record(Box::new(other))),
            Err(HarnessError::Mismatch(_))
        ));
    }
}
