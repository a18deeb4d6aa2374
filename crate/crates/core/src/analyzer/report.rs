use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AnalyzerError;

/// Analyzer view of one optimized realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub seed: u64,
    #[serde(rename = "D")]
    pub adiabatic_error: f64,
    #[serde(rename = "P_E0")]
    pub probability: f64,
    pub delta_min: f64,
}

/// The same quantities for the reference (linear) schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    #[serde(rename = "D")]
    pub adiabatic_error: f64,
    #[serde(rename = "P_E0")]
    pub probability: f64,
    pub delta_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    #[serde(rename = "D_cloaqc")]
    pub d_cloaqc: f64,
    #[serde(rename = "D_lin")]
    pub d_lin: f64,
    #[serde(rename = "Delta_cloaqc")]
    pub delta_cloaqc: f64,
    #[serde(rename = "Delta_lin")]
    pub delta_lin: f64,
    pub alpha_d: f64,
    pub alpha_delta: f64,
    /// `P(E_0)` of the median-D realization.
    #[serde(rename = "P_E0")]
    pub p_ground: f64,
    #[serde(rename = "P_E0_lin")]
    pub p_lin: f64,
    #[serde(rename = "P_E0_median")]
    pub p_median: f64,
    /// First and third quartiles.
    #[serde(rename = "D_iqr")]
    pub d_iqr: (f64, f64),
    #[serde(rename = "P_E0_iqr")]
    pub p_iqr: (f64, f64),
    pub median_seed: u64,
    pub realizations: Vec<RealizationResult>,
}

/// Index of the lower median of `values`; among entries equal to that value,
/// the one with the lowest key wins.
pub fn lower_median_index(values: &[f64], keys: &[u64]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted[(sorted.len() - 1) / 2];
    (0..values.len())
        .filter(|&i| values[i] == m)
        .min_by_key(|&i| keys[i])
}

/// `(Q1, Q3)` with linear interpolation between order statistics.
pub fn quartiles(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let x = p * (v.len() - 1) as f64;
        let i = x.floor() as usize;
        let j = (i + 1).min(v.len() - 1);
        v[i] + (x - i as f64) * (v[j] - v[i])
    };
    (q(0.25), q(0.75))
}

/// Median-D summary of an ensemble against a baseline.
pub fn performance_report(
    realizations: &[RealizationResult],
    baseline: &Baseline,
) -> Result<PerformanceReport, AnalyzerError> {
    let ds: Vec<f64> = realizations.iter().map(|r| r.adiabatic_error).collect();
    let ps: Vec<f64> = realizations.iter().map(|r| r.probability).collect();
    let seeds: Vec<u64> = realizations.iter().map(|r| r.seed).collect();
    let i = lower_median_index(&ds, &seeds).ok_or(AnalyzerError::NoRealizations)?;
    let med = realizations[i];
    let mut sorted_p = ps.clone();
    sorted_p.sort_by(f64::total_cmp);
    Ok(PerformanceReport {
        d_cloaqc: med.adiabatic_error,
        d_lin: baseline.adiabatic_error,
        delta_cloaqc: med.delta_min,
        delta_lin: baseline.delta_min,
        alpha_d: med.adiabatic_error / baseline.adiabatic_error,
        alpha_delta: med.delta_min / baseline.delta_min,
        p_ground: med.probability,
        p_lin: baseline.probability,
        p_median: sorted_p[(sorted_p.len() - 1) / 2],
        d_iqr: quartiles(&ds),
        p_iqr: quartiles(&ps),
        median_seed: med.seed,
        realizations: realizations.to_vec(),
    })
}

impl PerformanceReport {
    pub fn to_json(&self) -> Result<String, AnalyzerError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<(), AnalyzerError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One-row summary for plotting.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<(), AnalyzerError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "D_cloaqc",
            "D_lin",
            "alpha_D",
            "Delta_cloaqc",
            "Delta_lin",
            "alpha_Delta",
            "P_E0",
            "P_E0_lin",
            "P_E0_median",
            "D_q1",
            "D_q3",
            "P_q1",
            "P_q3",
            "median_seed",
            "realizations",
        ])?;
        w.write_record([
            self.d_cloaqc.to_string(),
            self.d_lin.to_string(),
            self.alpha_d.to_string(),
            self.delta_cloaqc.to_string(),
            self.delta_lin.to_string(),
            self.alpha_delta.to_string(),
            self.p_ground.to_string(),
            self.p_lin.to_string(),
            self.p_median.to_string(),
            self.d_iqr.0.to_string(),
            self.d_iqr.1.to_string(),
            self.p_iqr.0.to_string(),
            self.p_iqr.1.to_string(),
            self.median_seed.to_string(),
            self.realizations.len().to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }

    pub fn write_realizations_csv<W: Write>(&self, writer: W) -> Result<(), AnalyzerError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.realizations {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
