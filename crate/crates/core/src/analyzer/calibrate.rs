use serde::{Deserialize, Serialize};

use super::fidelity::{final_state, ground_state, EvolutionPolicy};
use super::gap::{gap_scan, DEFAULT_GAP_GRID};
use super::AnalyzerError;
use crate::qsim::{AdiabaticHamiltonian, Operator, QuantumState};
use crate::schedules::Controls;

/// Geometric scan grid for [`calibrate_runtime`], in units of `1/Δ_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationScan {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for CalibrationScan {
    fn default() -> Self {
        Self {
            t_min: 0.1,
            t_max: 50.0,
            points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub total_time: f64,
    /// `P(E_0)` re-simulated at `total_time`.
    pub probability: f64,
    /// Minimum gap of the schedule, the unit of the scan.
    pub delta_min: f64,
    /// Scan bracket that contained the first upward crossing.
    pub bracket: (f64, f64),
    /// Certified grid size at `total_time`.
    pub steps: usize,
}

impl Calibration {
    /// `T·Δ_min`.
    pub fn in_gap_units(&self) -> f64 {
        self.total_time * self.delta_min
    }
}

/// Shortest runtime at which `controls` reaches `P(E_0) = target` within `tol`.
///
/// `P(T)` oscillates, so the first bracket where it crosses `target` from
/// below on the geometric scan is bisected.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_runtime<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    initial: &QuantumState,
    problem: &Operator,
    target: f64,
    tol: f64,
    scan: &CalibrationScan,
    policy: &EvolutionPolicy,
) -> Result<Calibration, AnalyzerError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(AnalyzerError::InvalidTarget(target));
    }
    let delta_min = gap_scan(h, controls, DEFAULT_GAP_GRID)?.delta_min;
    if delta_min <= 0.0 {
        return Err(AnalyzerError::ClosedGap);
    }
    let ground = ground_state(problem)?;
    let p_at = |t: f64| -> Result<(f64, usize), AnalyzerError> {
        let (psi, steps) = final_state(h, controls, initial, t, policy)?;
        Ok((ground.inner(&psi)?.norm_sqr(), steps))
    };
    let t_lo = scan.t_min / delta_min;
    let t_hi = scan.t_max / delta_min;
    let points = scan.points.max(2);
    let ratio = (t_hi / t_lo).powf(1.0 / (points - 1) as f64);
    let (p0, steps0) = p_at(t_lo)?;
    if p0 >= target {
        if (p0 - target).abs() < tol {
            return Ok(Calibration {
                total_time: t_lo,
                probability: p0,
                delta_min,
                bracket: (t_lo, t_lo),
                steps: steps0,
            });
        }
        return Err(AnalyzerError::AboveTargetAtStart {
            target,
            p: p0,
            t_min: t_lo,
        });
    }
    let mut prev = (t_lo, p0);
    let mut best = p0;
    for i in 1..points {
        let t = t_lo * ratio.powi(i as i32);
        let (p, steps) = p_at(t)?;
        best = best.max(p);
        if p >= target {
            if (p - target).abs() < tol {
                return Ok(Calibration {
                    total_time: t,
                    probability: p,
                    delta_min,
                    bracket: (prev.0, t),
                    steps,
                });
            }
            let (mut a, mut b) = (prev.0, t);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let (pm, steps) = p_at(mid)?;
                if (pm - target).abs() < tol {
                    return Ok(Calibration {
                        total_time: mid,
                        probability: pm,
                        delta_min,
                        bracket: (prev.0, t),
                        steps,
                    });
                }
                if pm < target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            break;
        }
        prev = (t, p);
    }
    Err(AnalyzerError::Unreachable {
        target,
        t_min: t_lo,
        t_max: t_hi,
        best,
    })
}
