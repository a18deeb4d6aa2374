use serde::{Deserialize, Serialize};

use super::AnalyzerError;
use crate::qsim::{eigenvalues, AdiabaticHamiltonian, DEGENERACY_TOL};
use crate::schedules::Controls;

pub const MIN_GAP_GRID: usize = 101;
pub const DEFAULT_GAP_GRID: usize = 201;

/// Resolution of the golden-section refinement in `s`.
const REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    /// `(s, Δ(s))` on the uniform grid.
    pub grid: Vec<(f64, f64)>,
    pub delta_min: f64,
    pub s_star: f64,
    /// Minimum over the grid before refinement.
    pub coarse_min: f64,
}

fn gap_at<C: Controls + ?Sized>(h: &AdiabaticHamiltonian, controls: &C, s: f64) -> f64 {
    let ev = eigenvalues(&h.operator_for(&h.coefficients_at(controls, s)));
    match ev.as_slice() {
        [e0, e1, ..] => {
            let g = e1 - e0;
            if g < DEGENERACY_TOL {
                0.0
            } else {
                g
            }
        }
        _ => 0.0,
    }
}

/// `Δ(s) = E₁(s) − E₀(s)` on `grid_size` uniform points, with the minimum
/// refined by golden-section search between the neighbours of the coarse argmin.
pub fn gap_scan<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    grid_size: usize,
) -> Result<GapScan, AnalyzerError> {
    if grid_size < MIN_GAP_GRID {
        return Err(AnalyzerError::GridTooSmall {
            min: MIN_GAP_GRID,
            got: grid_size,
        });
    }
    h.check_controls(controls)?;
    let last = grid_size - 1;
    let grid: Vec<(f64, f64)> = (0..grid_size)
        .map(|i| {
            let s = i as f64 / last as f64;
            (s, gap_at(h, controls, s))
        })
        .collect();
    let (i_min, &(s_coarse, coarse_min)) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("grid is non-empty");
    let (mut s_star, mut delta_min) = (s_coarse, coarse_min);
    if coarse_min > 0.0 {
        let lo = grid[i_min.saturating_sub(1)].0;
        let hi = grid[(i_min + 1).min(last)].0;
        let (s, g) = golden_section(|s| gap_at(h, controls, s), lo, hi);
        if g < delta_min {
            s_star = s;
            delta_min = g;
        }
    }
    Ok(GapScan {
        grid,
        delta_min,
        s_star,
        coarse_min,
    })
}

fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > REFINE_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{GroverControls, ProblemContext};

    #[test]
    fn grover_gap_law() {
        for n in [2usize, 4, 6] {
            let ctx = ProblemContext::grover(n, 1, GroverControls::One, 5).unwrap();
            let scan =
                gap_scan(ctx.hamiltonian(), &ctx.linear_schedule(), DEFAULT_GAP_GRID).unwrap();
            let want = (1.0 / (1u64 << n) as f64).sqrt();
            assert!(
                (scan.delta_min - want).abs() < 1e-6,
                "n={n}: {}",
                scan.delta_min
            );
            assert!((scan.s_star - 0.5).abs() < 1e-3);
            assert!((scan.grid[0].1 - 1.0).abs() < 1e-12);
            assert!(scan.delta_min <= scan.coarse_min);
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let ctx = ProblemContext::grover(2, 0, GroverControls::One, 5).unwrap();
        assert!(matches!(
            gap_scan(ctx.hamiltonian(), ctx.template(), 100),
            Err(AnalyzerError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (s, v) = golden_section(|s| (s - 0.3141).powi(2) + 2.0, 0.0, 1.0);
        assert!((s - 0.3141).abs() < 1e-6 && (v - 2.0).abs() < 1e-12);
    }
}
