use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::krylov::Lanczos;
use super::{trace_norm_distance, AdiabaticHamiltonian, QuantumState, SimError};
use crate::schedules::Controls;

/// Minimum time-grid size accepted by [`EvolutionConfig`].
pub const MIN_STEPS: usize = 16;

/// Largest grid [`certify_steps`] will try before giving up.
pub const MAX_CERTIFIED_STEPS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta on the state vector.
    #[default]
    Rk4,
    /// Per-step `exp(−i T h H(s_mid))` from a dense eigendecomposition.
    ExactPropagator,
    /// Fourth-order commutator-free Magnus integrator: two exponentials per
    /// step at the Gauss–Legendre nodes, each applied by Lanczos projection.
    /// The step size is limited by how fast `H` changes, not by `‖H‖`.
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub total_time: f64,
    pub steps: usize,
    #[serde(default)]
    pub method: Method,
}

impl EvolutionConfig {
    pub fn new(total_time: f64, steps: usize, method: Method) -> Result<Self, SimError> {
        let cfg = Self {
            total_time,
            steps,
            method,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return Err(SimError::InvalidEvolution(format!(
                "total time must be positive, got {}",
                self.total_time
            )));
        }
        if self.steps < MIN_STEPS {
            return Err(SimError::InvalidEvolution(format!(
                "need at least {MIN_STEPS} steps, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn with_steps(self, steps: usize) -> Self {
        Self { steps, ..self }
    }

    /// Fixed-step rule for the Runge–Kutta integrator: 2000 steps per unit of
    /// `T·max_s‖H(s)‖`, and never fewer than 512.
    pub fn default_steps(total_time: f64, norm_bound: f64) -> usize {
        ((2000.0 * total_time * norm_bound).ceil() as usize).max(512)
    }
}

/// Smallest grid in the doubling sequence `start, 2·start, …` whose final state
/// moves by less than `tol` (trace distance) when the grid is doubled again.
pub fn certify_steps<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &QuantumState,
    tol: f64,
) -> Result<usize, SimError> {
    Ok(evolve_certified(h, controls, cfg, initial, tol)?.1)
}

/// Runs the [`certify_steps`] search and returns the finer of the last two
/// states together with the certified (coarser) grid size.
pub fn evolve_certified<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &QuantumState,
    tol: f64,
) -> Result<(QuantumState, usize), SimError> {
    let mut steps = cfg.steps.max(MIN_STEPS);
    let mut coarse = evolve(h, controls, &cfg.with_steps(steps), initial)?;
    loop {
        let fine = evolve(h, controls, &cfg.with_steps(2 * steps), initial)?;
        let change = trace_norm_distance(&coarse, &fine)?;
        if change < tol {
            return Ok((fine, steps));
        }
        if 2 * steps > MAX_CERTIFIED_STEPS {
            return Err(SimError::StepsTooSmall { steps, change });
        }
        steps *= 2;
        coarse = fine;
    }
}

/// Solves `i dψ/ds = T H_ad(s) ψ` on `s ∈ [0, 1]`.
pub fn evolve<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &QuantumState,
) -> Result<QuantumState, SimError> {
    evolve_observed(h, controls, cfg, initial, |_, _| {})
}

/// [`evolve`] with a callback after every step, given `(s, ψ(s))`.
pub fn evolve_observed<C, F>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &QuantumState,
    observer: F,
) -> Result<QuantumState, SimError>
where
    C: Controls + ?Sized,
    F: FnMut(f64, &[C64]),
{
    cfg.validate()?;
    h.check_controls(controls)?;
    if initial.dim() != h.dim() {
        return Err(SimError::DimensionMismatch {
            expected: h.dim(),
            got: initial.dim(),
        });
    }
    let norm = initial.norm();
    if (norm - 1.0).abs() >= 1e-9 {
        return Err(SimError::NotNormalized { norm });
    }
    let amps = match cfg.method {
        Method::Rk4 => rk4(h, controls, cfg, initial.amplitudes(), observer),
        Method::ExactPropagator => exact(h, controls, cfg, initial.amplitudes(), observer),
        Method::Magnus4 => magnus4(h, controls, cfg, initial.amplitudes(), observer),
    };
    Ok(QuantumState::from_raw(initial.qubits(), amps))
}

/// Runs at `steps` and `2·steps` and fails when the final states differ in
/// overlap modulus by more than `tol`.
pub fn evolve_checked<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &QuantumState,
    tol: f64,
) -> Result<QuantumState, SimError> {
    let coarse = evolve(h, controls, cfg, initial)?;
    let fine = evolve(h, controls, &cfg.with_steps(cfg.steps * 2), initial)?;
    let change = 1.0 - coarse.inner(&fine)?.norm();
    if change > tol {
        return Err(SimError::StepsTooSmall {
            steps: cfg.steps,
            change,
        });
    }
    Ok(fine)
}

/// Trace-norm distance between runs at `steps` and `2·steps`.
pub fn step_doubling_change<C: Controls + ?Sized>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &QuantumState,
) -> Result<f64, SimError> {
    let coarse = evolve(h, controls, cfg, initial)?;
    let fine = evolve(h, controls, &cfg.with_steps(cfg.steps * 2), initial)?;
    trace_norm_distance(&coarse, &fine)
}

struct Coefficients<'a, C: ?Sized> {
    h: &'a AdiabaticHamiltonian,
    controls: &'a C,
    y: Vec<f64>,
}

impl<'a, C: Controls + ?Sized> Coefficients<'a, C> {
    fn new(h: &'a AdiabaticHamiltonian, controls: &'a C) -> Self {
        Self {
            h,
            controls,
            y: vec![0.0; controls.channel_count()],
        }
    }

    fn at(&mut self, s: f64, out: &mut [f64]) {
        self.controls.values_into(s, &mut self.y);
        self.h.coefficients_into(&self.y, s, out);
    }
}

fn rk4<C, F>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &[C64],
    mut observer: F,
) -> Vec<C64>
where
    C: Controls + ?Sized,
    F: FnMut(f64, &[C64]),
{
    let dim = initial.len();
    let steps = cfg.steps;
    let ds = 1.0 / steps as f64;
    let t = cfg.total_time;
    let zero = C64::new(0.0, 0.0);
    let mut psi = initial.to_vec();
    let mut acc = vec![zero; dim];
    let mut tmp = vec![zero; dim];
    let mut k = vec![zero; dim];
    let mut coeffs = Coefficients::new(h, controls);
    let nprim = h.primitives().len();
    let (mut c0, mut c_mid, mut c1) = (vec![0.0; nprim], vec![0.0; nprim], vec![0.0; nprim]);
    coeffs.at(0.0, &mut c0);
    // k = −i T H ψ; multiply by −i after the real-scaled apply.
    let minus_i = C64::new(0.0, -1.0);

    for step in 0..steps {
        let s0 = step as f64 * ds;
        let s1 = if step + 1 == steps {
            1.0
        } else {
            (step + 1) as f64 * ds
        };
        coeffs.at(s0 + 0.5 * ds, &mut c_mid);
        coeffs.at(s1, &mut c1);

        h.apply_into(&c0, t, &psi, &mut k);
        for i in 0..dim {
            let ki = minus_i * k[i];
            acc[i] = psi[i] + ki * (ds / 6.0);
            tmp[i] = psi[i] + ki * (0.5 * ds);
        }
        h.apply_into(&c_mid, t, &tmp, &mut k);
        for i in 0..dim {
            let ki = minus_i * k[i];
            acc[i] += ki * (ds / 3.0);
            tmp[i] = psi[i] + ki * (0.5 * ds);
        }
        h.apply_into(&c_mid, t, &tmp, &mut k);
        for i in 0..dim {
            let ki = minus_i * k[i];
            acc[i] += ki * (ds / 3.0);
            tmp[i] = psi[i] + ki * ds;
        }
        h.apply_into(&c1, t, &tmp, &mut k);
        for i in 0..dim {
            psi[i] = acc[i] + minus_i * k[i] * (ds / 6.0);
        }
        std::mem::swap(&mut c0, &mut c1);
        observer(s1, &psi);
    }
    psi
}

fn exact<C, F>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &[C64],
    mut observer: F,
) -> Vec<C64>
where
    C: Controls + ?Sized,
    F: FnMut(f64, &[C64]),
{
    let dim = initial.len();
    let dense: Vec<DMatrix<C64>> = h.primitives().iter().map(|p| p.matrix()).collect();
    let ds = 1.0 / cfg.steps as f64;
    let mut coeffs = Coefficients::new(h, controls);
    let mut c = vec![0.0; dense.len()];
    let mut psi = DVector::from_column_slice(initial);
    for step in 0..cfg.steps {
        coeffs.at((step as f64 + 0.5) * ds, &mut c);
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for (mat, &w) in dense.iter().zip(&c) {
            if w != 0.0 {
                m += mat * C64::new(w, 0.0);
            }
        }
        let eig = SymmetricEigen::new(m);
        let v = &eig.eigenvectors;
        let mut proj = v.adjoint() * &psi;
        for (p, &lambda) in proj.iter_mut().zip(eig.eigenvalues.iter()) {
            *p *= C64::from_polar(1.0, -cfg.total_time * ds * lambda);
        }
        psi = v * proj;
        let s1 = if step + 1 == cfg.steps {
            1.0
        } else {
            (step + 1) as f64 * ds
        };
        observer(s1, psi.as_slice());
    }
    psi.as_slice().to_vec()
}

fn magnus4<C, F>(
    h: &AdiabaticHamiltonian,
    controls: &C,
    cfg: &EvolutionConfig,
    initial: &[C64],
    mut observer: F,
) -> Vec<C64>
where
    C: Controls + ?Sized,
    F: FnMut(f64, &[C64]),
{
    let offset = 3f64.sqrt() / 6.0;
    let (w_near, w_far) = (0.25 + offset, 0.25 - offset);
    let ds = 1.0 / cfg.steps as f64;
    let tau = cfg.total_time * ds;
    let nprim = h.primitives().len();
    let mut coeffs = Coefficients::new(h, controls);
    let (mut x1, mut x2, mut mix) = (vec![0.0; nprim], vec![0.0; nprim], vec![0.0; nprim]);
    let mut lanczos = Lanczos::new(initial.len());
    let mut psi = initial.to_vec();
    for step in 0..cfg.steps {
        let s0 = step as f64 * ds;
        coeffs.at(s0 + (0.5 - offset) * ds, &mut x1);
        coeffs.at(s0 + (0.5 + offset) * ds, &mut x2);
        // The earlier exponential leans on the earlier node.
        for (first, second) in [(&x1, &x2), (&x2, &x1)] {
            for ((m, a), b) in mix.iter_mut().zip(first.iter()).zip(second.iter()) {
                *m = w_near * a + w_far * b;
            }
            let mut apply = |v: &[C64], out: &mut [C64]| h.apply_into(&mix, 1.0, v, out);
            lanczos.expm_apply(&mut apply, tau, &mut psi);
        }
        let s1 = if step + 1 == cfg.steps {
            1.0
        } else {
            (step + 1) as f64 * ds
        };
        observer(s1, &psi);
    }
    psi
}
