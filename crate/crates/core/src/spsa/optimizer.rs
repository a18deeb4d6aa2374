use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{gains, SpsaConfig};
use super::objective::{Objective, SampledEnergy, ScheduleObjective, SimulatedDevice};
use super::SpsaError;
use crate::problems::ProblemContext;
use crate::qsim::EvolutionConfig;
use crate::schedules::ControlSchedule;
use crate::seeds::derive_seed;

// Independent seed streams under `SpsaConfig::seed`.
const STREAM_DELTA: u64 = 0;
const STREAM_PLUS: u64 = 1;
const STREAM_MINUS: u64 = 2;
const STREAM_PILOT_VALUE: u64 = 3;
const STREAM_PILOT_GRADIENT: u64 = 4;
const STREAM_RESCORE: u64 = 5;

/// Constraint tolerance for the initial schedule handed to [`optimize_schedule`].
const INITIAL_CONSTRAINT_TOL: f64 = 1e-12;

/// i.i.d. `±1` entries.
pub fn rademacher(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// One simultaneous-perturbation gradient estimate and the two evaluations behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub gradient: Vec<f64>,
    pub delta: Vec<f64>,
    pub e_plus: f64,
    pub e_minus: f64,
}

/// `g_i = [Ê(Λ+βΔ) − Ê(Λ−βΔ)] / (2βΔ_i)` for an explicit perturbation `Δ`.
pub fn spsa_gradient_with<O: Objective + ?Sized>(
    objective: &O,
    params: &[f64],
    beta: f64,
    delta: &[f64],
    samples: usize,
    seeds: (u64, u64),
) -> Result<GradientEstimate, SpsaError> {
    if delta.len() != params.len() {
        return Err(SpsaError::Dimension {
            expected: params.len(),
            got: delta.len(),
        });
    }
    let shifted = |sign: f64| -> Vec<f64> {
        params
            .iter()
            .zip(delta)
            .map(|(p, d)| p + sign * beta * d)
            .collect()
    };
    let e_plus = objective.evaluate(&shifted(1.0), samples, seeds.0)?;
    let e_minus = objective.evaluate(&shifted(-1.0), samples, seeds.1)?;
    let diff = e_plus - e_minus;
    Ok(GradientEstimate {
        gradient: delta.iter().map(|d| diff / (2.0 * beta * d)).collect(),
        delta: delta.to_vec(),
        e_plus,
        e_minus,
    })
}

/// Draws a Rademacher `Δ` from `seed` and two evaluation seeds from it.
pub fn spsa_gradient<O: Objective + ?Sized>(
    objective: &O,
    params: &[f64],
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<GradientEstimate, SpsaError> {
    let delta = rademacher(params.len(), derive_seed(seed, &[STREAM_DELTA]));
    let seeds = (
        derive_seed(seed, &[STREAM_PLUS]),
        derive_seed(seed, &[STREAM_MINUS]),
    );
    spsa_gradient_with(objective, params, beta, &delta, samples, seeds)
}

/// One line of the trajectory log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub k: usize,
    pub alpha_k: f64,
    pub beta_k: f64,
    #[serde(rename = "E_plus")]
    pub e_plus: f64,
    #[serde(rename = "E_minus")]
    pub e_minus: f64,
    /// Lowest `Ê` seen so far over all evaluated points.
    #[serde(rename = "E_best")]
    pub e_best: f64,
    pub experiments_total: u64,
}

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], writer: W) -> Result<(), SpsaError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(reader: R) -> Result<Vec<TrajectoryRow>, SpsaError> {
    let mut r = csv::Reader::from_reader(reader);
    let rows = r.deserialize().collect::<Result<Vec<TrajectoryRow>, _>>()?;
    Ok(rows)
}

/// Optimizer state between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsaState {
    /// Completed iterations.
    pub k: usize,
    pub params: Vec<f64>,
    /// Experiments spent by iterations, `2M·k`.
    pub experiments: u64,
    /// The evaluated point with the lowest `Ê` so far.
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub trajectory: Vec<TrajectoryRow>,
}

impl SpsaState {
    pub fn new(params: Vec<f64>) -> Self {
        Self {
            k: 0,
            best_params: params.clone(),
            params,
            experiments: 0,
            best_value: f64::INFINITY,
            trajectory: Vec::new(),
        }
    }
}

/// `Λ_{k+1} = Λ_k − α_k [g_k + λ_ad ∇J_ad(Λ_k)]`.
pub fn spsa_step<O: Objective + ?Sized>(
    mut state: SpsaState,
    cfg: &SpsaConfig,
    objective: &O,
) -> Result<SpsaState, SpsaError> {
    let k = state.k;
    let (alpha, beta) = gains(cfg, k);
    let est = spsa_gradient(
        objective,
        &state.params,
        beta,
        cfg.m,
        derive_seed(cfg.seed, &[k as u64]),
    )?;
    if !(est.e_plus.is_finite() && est.e_minus.is_finite()) {
        return Err(SpsaError::NonFinite { k });
    }
    let (e_low, sign) = if est.e_plus <= est.e_minus {
        (est.e_plus, 1.0)
    } else {
        (est.e_minus, -1.0)
    };
    if e_low < state.best_value {
        state.best_value = e_low;
        state.best_params = state
            .params
            .iter()
            .zip(&est.delta)
            .map(|(p, d)| p + sign * beta * d)
            .collect();
    }
    let penalty = if cfg.lambda_ad > 0.0 {
        objective.penalty_gradient(&state.params)?
    } else {
        vec![0.0; state.params.len()]
    };
    for ((p, g), j) in state.params.iter_mut().zip(&est.gradient).zip(&penalty) {
        *p -= alpha * (g + cfg.lambda_ad * j);
    }
    state.k += 1;
    state.experiments += 2 * cfg.m as u64;
    state.trajectory.push(TrajectoryRow {
        k,
        alpha_k: alpha,
        beta_k: beta,
        e_plus: est.e_plus,
        e_minus: est.e_minus,
        e_best: state.best_value,
        experiments_total: state.experiments,
    });
    Ok(state)
}

/// Pilot-based gain selection.
///
/// `β_0` is the standard deviation of `Ê` over repeated evaluations at `Λ_0`
/// (floored so a noiseless start still perturbs), `R` is a fraction of `K`,
/// and `α_0` makes the first step move each parameter by about
/// `step_fraction`, given the mean pilot gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainRule {
    pub pilot_evaluations: usize,
    pub pilot_gradients: usize,
    pub step_fraction: f64,
    pub r_fraction: f64,
    pub beta0_floor: f64,
}

impl Default for GainRule {
    fn default() -> Self {
        Self {
            pilot_evaluations: 20,
            pilot_gradients: 10,
            step_fraction: 0.1,
            r_fraction: 0.1,
            beta0_floor: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedGains {
    pub alpha0: f64,
    pub beta0: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Experiments spent on the pilot, outside the `2MK` budget.
    pub experiments: u64,
}

/// Runs the pilot at `params` and returns `(α_0, β_0, R)`.
///
/// `exponent` is the `δ` that will be used for `α_k`.
pub fn calibrate_gains<O: Objective + ?Sized>(
    objective: &O,
    params: &[f64],
    iterations: usize,
    samples: usize,
    exponent: f64,
    rule: &GainRule,
    seed: u64,
) -> Result<CalibratedGains, SpsaError> {
    calibrate_gains_with(
        objective, params, iterations, samples, exponent, rule, None, seed,
    )
}

/// [`calibrate_gains`] with an optional fixed `β_0`, which skips the pilot
/// value evaluations.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_gains_with<O: Objective + ?Sized>(
    objective: &O,
    params: &[f64],
    iterations: usize,
    samples: usize,
    exponent: f64,
    rule: &GainRule,
    beta0: Option<f64>,
    seed: u64,
) -> Result<CalibratedGains, SpsaError> {
    if rule.pilot_evaluations < 2 || rule.pilot_gradients == 0 {
        return Err(SpsaError::Config(
            "the pilot needs at least 2 evaluations and 1 gradient".into(),
        ));
    }
    if !(rule.step_fraction > 0.0 && rule.beta0_floor > 0.0 && rule.r_fraction >= 0.0) {
        return Err(SpsaError::Config(
            "gain rule fractions must be positive".into(),
        ));
    }
    let (beta0, value_evaluations) = match beta0 {
        Some(b) if b > 0.0 && b.is_finite() => (b, 0),
        Some(b) => {
            return Err(SpsaError::Config(format!(
                "beta0 must be positive, got {b}"
            )))
        }
        None => {
            let values = (0..rule.pilot_evaluations)
                .map(|i| {
                    objective.evaluate(
                        params,
                        samples,
                        derive_seed(seed, &[STREAM_PILOT_VALUE, i as u64]),
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
            (var.sqrt().max(rule.beta0_floor), rule.pilot_evaluations)
        }
    };

    let mut magnitude = 0.0;
    for i in 0..rule.pilot_gradients {
        let est = spsa_gradient(
            objective,
            params,
            beta0,
            samples,
            derive_seed(seed, &[STREAM_PILOT_GRADIENT, i as u64]),
        )?;
        magnitude +=
            est.gradient.iter().map(|g| g.abs()).sum::<f64>() / est.gradient.len().max(1) as f64;
    }
    magnitude /= rule.pilot_gradients as f64;
    let r = rule.r_fraction * iterations as f64;
    // A flat pilot (every estimate equal) carries no scale; fall back to unit gradient.
    let scale = if magnitude > 1e-12 { magnitude } else { 1.0 };
    let alpha0 = rule.step_fraction * (1.0 + r).powf(exponent) / scale;
    let experiments = (value_evaluations + 2 * rule.pilot_gradients) as u64 * samples as u64;
    Ok(CalibratedGains {
        alpha0,
        beta0,
        r,
        experiments,
    })
}

/// Which re-scored candidate [`optimize`] selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selected {
    Final,
    Best,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub final_params: Vec<f64>,
    pub best_params: Vec<f64>,
    /// Fresh-seed `Ê` with `4M` samples; `None` when `K = 0`.
    pub final_score: Option<f64>,
    pub best_score: Option<f64>,
    pub selected: Selected,
    pub trajectory: Vec<TrajectoryRow>,
    /// `2MK`.
    pub experiments: u64,
    /// Re-scoring experiments on top of `2MK`.
    pub rescore_experiments: u64,
}

impl OptimizeOutcome {
    pub fn selected_params(&self) -> &[f64] {
        match self.selected {
            Selected::Final => &self.final_params,
            Selected::Best => &self.best_params,
        }
    }
}

/// Runs `K` SPSA iterations from `initial`.
///
/// `observer` sees the state after every iteration. At the end the final
/// iterate and the best evaluated point are both re-scored with `4M` fresh
/// samples; the lower score wins and ties go to the final iterate.
pub fn optimize<O, F>(
    cfg: &SpsaConfig,
    objective: &O,
    initial: &[f64],
    mut observer: F,
) -> Result<OptimizeOutcome, SpsaError>
where
    O: Objective + ?Sized,
    F: FnMut(&SpsaState) -> Result<(), SpsaError>,
{
    cfg.validate()?;
    if initial.len() != objective.dimension() {
        return Err(SpsaError::Dimension {
            expected: objective.dimension(),
            got: initial.len(),
        });
    }
    let mut state = SpsaState::new(initial.to_vec());
    for _ in 0..cfg.k {
        state = spsa_step(state, cfg, objective)?;
        observer(&state)?;
    }
    if cfg.k == 0 {
        return Ok(OptimizeOutcome {
            final_params: initial.to_vec(),
            best_params: initial.to_vec(),
            final_score: None,
            best_score: None,
            selected: Selected::Final,
            trajectory: Vec::new(),
            experiments: 0,
            rescore_experiments: 0,
        });
    }
    let rescore_m = 4 * cfg.m;
    let final_score = objective.evaluate(
        &state.params,
        rescore_m,
        derive_seed(cfg.seed, &[STREAM_RESCORE, 0]),
    )?;
    let best_score = objective.evaluate(
        &state.best_params,
        rescore_m,
        derive_seed(cfg.seed, &[STREAM_RESCORE, 1]),
    )?;
    let selected = if best_score < final_score {
        Selected::Best
    } else {
        Selected::Final
    };
    Ok(OptimizeOutcome {
        final_params: state.params,
        best_params: state.best_params,
        final_score: Some(final_score),
        best_score: Some(best_score),
        selected,
        trajectory: state.trajectory,
        experiments: state.experiments,
        rescore_experiments: 2 * rescore_m as u64,
    })
}

/// [`optimize`] outcome mapped back to schedules.
#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub selected: ControlSchedule,
    pub final_schedule: ControlSchedule,
    pub best_schedule: ControlSchedule,
    pub outcome: OptimizeOutcome,
}

/// Optimizes the free coefficients of `initial` on a simulated device for `ctx`.
pub fn optimize_schedule<F>(
    cfg: &SpsaConfig,
    ctx: &ProblemContext,
    evolution: EvolutionConfig,
    initial: &ControlSchedule,
    observer: F,
) -> Result<ScheduleOutcome, SpsaError>
where
    F: FnMut(&SpsaState) -> Result<(), SpsaError>,
{
    initial.check_constraints(INITIAL_CONSTRAINT_TOL)?;
    let energy = SampledEnergy::new(
        SimulatedDevice::for_problem(ctx, evolution),
        ctx.problem_hamiltonian(),
    )?;
    let objective = ScheduleObjective::new(initial.clone(), energy);
    let outcome = optimize(cfg, &objective, &initial.free_params(), observer)?;
    Ok(ScheduleOutcome {
        selected: objective.schedule(outcome.selected_params())?,
        final_schedule: objective.schedule(&outcome.final_params)?,
        best_schedule: objective.schedule(&outcome.best_params)?,
        outcome,
    })
}
