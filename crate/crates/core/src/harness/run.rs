use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, InstanceSource, ProblemSpec, RuntimeSpec};
use super::HarnessError;
use crate::analyzer::{
    adiabatic_error, calibrate_runtime, final_state, gap_scan, ground_state_probability,
    performance_report, sampled_ground_state_probability, Baseline, Calibration, PerformanceReport,
    RealizationResult, DEFAULT_GAP_GRID,
};
use crate::problems::{
    generate_usa_instance, NoiseModel, ProblemContext, ProblemInstance, DEFAULT_RETRY_BUDGET,
};
use crate::qsim::EvolutionConfig;
use crate::schedules::ControlSchedule;
use crate::seeds::{derive_seed, realization_seed};
use crate::spsa::{
    calibrate_gains_with, optimize, CalibratedGains, Objective, ScheduleObjective, Selected,
    SpsaConfig, TrajectoryRow,
};

// Streams under a realization seed.
const STREAM_SPSA: u64 = 0;
const STREAM_PILOT: u64 = 1;
// Stream under the master seed for the linear-schedule sampling pilot.
const STREAM_GROUND_PILOT: u64 = 1 << 32;

/// Pilot evaluations behind [`Prepared::pilot_probability`], in units of `M`.
const GROUND_PILOT_BATCHES: usize = 20;

/// Everything shared by the realizations of one run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    /// Noiseless problem; the runtime is calibrated on it.
    pub clean: ProblemContext,
    /// Problem as the device sees it, noise included.
    pub context: ProblemContext,
    pub instance: Option<ProblemInstance>,
    pub total_time: f64,
    pub calibration: Option<Calibration>,
    /// Certified grid of the linear schedule at `total_time`.
    pub linear_steps: usize,
    pub optimizer_evolution: EvolutionConfig,
    pub baseline: Baseline,
    /// Sampled `P(E_0)` of the linear schedule from `20·M` measurements.
    pub pilot_probability: f64,
    pub problem_hash: String,
}

/// `D` of the optimizer's current iterate after `k` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: usize,
    #[serde(rename = "D")]
    pub adiabatic_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub seed: u64,
    pub gains: CalibratedGains,
    pub selected: Selected,
    pub final_score: Option<f64>,
    pub best_score: Option<f64>,
    /// `2MK`.
    pub experiments: u64,
    pub rescore_experiments: u64,
    #[serde(rename = "D")]
    pub adiabatic_error: f64,
    #[serde(rename = "P_E0")]
    pub probability: f64,
    pub delta_min: f64,
    pub checkpoints: Vec<Checkpoint>,
    /// Free coefficients of the selected schedule.
    pub params: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub problem_hash: String,
    pub total_time: f64,
    pub calibration: Option<Calibration>,
    pub optimizer_steps: usize,
    pub baseline: Baseline,
    pub pilot_probability: f64,
    /// The linear schedule never produced the ground bitstring in the pilot,
    /// so the sampled objective carries no signal about it.
    pub ground_unsampled: bool,
    pub realizations: Vec<RealizationRecord>,
    pub report: PerformanceReport,
    pub wall_clock: WallClock,
}

impl RunRecord {
    /// Median `D` over realizations at every checkpoint shared by all of them.
    pub fn median_checkpoints(&self) -> Vec<(usize, f64)> {
        let Some(first) = self.realizations.first() else {
            return Vec::new();
        };
        first
            .checkpoints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let ds: Vec<f64> = self
                    .realizations
                    .iter()
                    .map(|r| r.checkpoints[i].adiabatic_error)
                    .collect();
                (c.k, lower_median(&ds))
            })
            .collect()
    }
}

pub(crate) fn lower_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Iterations at which `D` is recorded: `0`, the powers of two below `K`, and `K`.
pub(crate) fn checkpoint_schedule(k: usize) -> Vec<usize> {
    let mut ks = vec![0];
    let mut p = 1;
    while p < k {
        ks.push(p);
        p *= 2;
    }
    if k > 0 {
        ks.push(k);
    }
    ks
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// SHA-256 of the config's canonical JSON, output directory excluded.
pub(crate) fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output = None;
    sha256_hex(
        serde_json::to_string(&c)
            .expect("config serializes")
            .as_bytes(),
    )
}

fn problem_hash(cfg: &ExperimentConfig, instance: Option<&ProblemInstance>) -> String {
    #[derive(Serialize)]
    struct Identity<'a> {
        problem: serde_json::Value,
        instance: Option<&'a ProblemInstance>,
        basis_size: usize,
        noise: Option<super::NoiseSpec>,
    }
    let problem = match &cfg.problem {
        ProblemSpec::Grover { .. } => serde_json::to_value(&cfg.problem),
        ProblemSpec::Max2sat {
            scenario,
            intermediate,
            ..
        } => serde_json::to_value((scenario, intermediate)),
    }
    .expect("problem serializes");
    let id = Identity {
        problem,
        instance,
        basis_size: cfg.schedule.basis_size,
        noise: cfg.noise.filter(|n| n.strength != 0.0),
    };
    sha256_hex(
        serde_json::to_string(&id)
            .expect("identity serializes")
            .as_bytes(),
    )
}

fn load_instance(source: &InstanceSource) -> Result<ProblemInstance, HarnessError> {
    match source {
        InstanceSource::Instance(path) => Ok(ProblemInstance::load(path)?),
        InstanceSource::Generate { n, seed } => {
            Ok(generate_usa_instance(*n, *seed, DEFAULT_RETRY_BUDGET)?)
        }
    }
}

/// Builds the problem, fixes `T` and simulates the linear baseline.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    config.validate()?;
    let basis = config.schedule.basis_size;
    let (clean, instance) = match &config.problem {
        ProblemSpec::Grover {
            n,
            marked,
            controls,
        } => (ProblemContext::grover(*n, *marked, *controls, basis)?, None),
        ProblemSpec::Max2sat {
            source,
            scenario,
            intermediate,
        } => {
            let inst = load_instance(source)?;
            (
                ProblemContext::max2sat(&inst, *scenario, *intermediate, basis)?,
                Some(inst),
            )
        }
    };
    let context = match &config.noise {
        // C = 0 is the noiseless device, not a zero-weighted extra term.
        Some(noise) if noise.strength != 0.0 => clean.clone().with_noise(&NoiseModel::new(
            clean.qubits(),
            noise.kind,
            noise.strength,
            noise.seed,
        ))?,
        _ => clean.clone(),
    };
    let policy = config.evolution.policy();
    let linear = clean.linear_schedule();
    let (total_time, calibration) = match config.runtime {
        RuntimeSpec::Explicit { total_time } => (total_time, None),
        RuntimeSpec::GapUnits { t_delta } => {
            let gap = gap_scan(clean.hamiltonian(), &linear, DEFAULT_GAP_GRID)?;
            (t_delta / gap.delta_min, None)
        }
        RuntimeSpec::Calibrate {
            target_p,
            tolerance,
            scan,
        } => {
            let cal = calibrate_runtime(
                clean.hamiltonian(),
                &linear,
                clean.initial_state(),
                clean.problem_hamiltonian(),
                target_p,
                tolerance,
                &scan,
                &policy,
            )?;
            (cal.total_time, Some(cal))
        }
    };
    let problem = context.problem_hamiltonian();
    let (psi, linear_steps) = final_state(
        context.hamiltonian(),
        &linear,
        context.initial_state(),
        total_time,
        &policy,
    )?;
    let baseline = Baseline {
        adiabatic_error: adiabatic_error(&psi, problem)?,
        probability: ground_state_probability(&psi, problem)?,
        delta_min: gap_scan(context.hamiltonian(), &linear, DEFAULT_GAP_GRID)?.delta_min,
    };
    let pilot_probability = sampled_ground_state_probability(
        &psi,
        problem,
        GROUND_PILOT_BATCHES * config.spsa.m,
        derive_seed(config.master_seed, &[STREAM_GROUND_PILOT]),
    )?;
    let optimizer_evolution = EvolutionConfig::new(
        total_time,
        config.evolution.optimizer_step_factor * linear_steps,
        config.evolution.method,
    )?;
    Ok(Prepared {
        problem_hash: problem_hash(config, instance.as_ref()),
        config: config.clone(),
        clean,
        context,
        instance,
        total_time,
        calibration,
        linear_steps,
        optimizer_evolution,
        baseline,
        pilot_probability,
    })
}

impl Prepared {
    /// `(D, P(E_0), Δ_min)` of a schedule on the device Hamiltonian.
    pub fn evaluate(&self, schedule: &ControlSchedule) -> Result<(f64, f64, f64), HarnessError> {
        let d = self.adiabatic_error_of(schedule)?;
        let policy = self.config.evolution.policy();
        let (psi, _) = final_state(
            self.context.hamiltonian(),
            schedule,
            self.context.initial_state(),
            self.total_time,
            &policy,
        )?;
        let p = ground_state_probability(&psi, self.context.problem_hamiltonian())?;
        let gap = gap_scan(self.context.hamiltonian(), schedule, DEFAULT_GAP_GRID)?.delta_min;
        Ok((d, p, gap))
    }

    pub fn adiabatic_error_of<C: crate::schedules::Controls + ?Sized>(
        &self,
        controls: &C,
    ) -> Result<f64, HarnessError> {
        self.adiabatic_error_with(self.context.hamiltonian(), controls)
    }

    pub(crate) fn adiabatic_error_with<C: crate::schedules::Controls + ?Sized>(
        &self,
        h: &crate::qsim::AdiabaticHamiltonian,
        controls: &C,
    ) -> Result<f64, HarnessError> {
        let (psi, _) = final_state(
            h,
            controls,
            self.context.initial_state(),
            self.total_time,
            &self.config.evolution.policy(),
        )?;
        Ok(adiabatic_error(&psi, self.context.problem_hamiltonian())?)
    }

    pub fn objective(
        &self,
    ) -> Result<ScheduleObjective<crate::spsa::SimulatedDevice>, HarnessError> {
        Ok(ScheduleObjective::simulated(
            &self.context,
            self.optimizer_evolution,
        )?)
    }

    /// One full realization: pilot gains, `K` SPSA iterations, analysis.
    pub fn run_realization(&self, index: usize) -> Result<RealizationRecord, HarnessError> {
        let cfg = &self.config;
        let seed = realization_seed(cfg.master_seed, index);
        let objective = self.objective()?;
        let start = vec![0.0; objective.dimension()];
        let spec = &cfg.spsa;
        let gains = match spec.explicit_gains() {
            Some((alpha0, beta0, r)) => CalibratedGains {
                alpha0,
                beta0,
                r,
                experiments: 0,
            },
            None => {
                let mut g = calibrate_gains_with(
                    &objective,
                    &start,
                    spec.k,
                    spec.m,
                    spec.delta,
                    &spec.gains,
                    spec.beta0,
                    derive_seed(seed, &[STREAM_PILOT]),
                )?;
                g.alpha0 = spec.alpha0.unwrap_or(g.alpha0);
                g.r = spec.r.unwrap_or(g.r);
                g
            }
        };
        let spsa = SpsaConfig {
            alpha0: gains.alpha0,
            beta0: gains.beta0,
            r: gains.r,
            delta: spec.delta,
            zeta: spec.zeta,
            lambda_ad: spec.lambda_ad,
            k: spec.k,
            m: spec.m,
            seed: derive_seed(seed, &[STREAM_SPSA]),
        };
        let marks = checkpoint_schedule(spec.k);
        let mut checkpoints = vec![Checkpoint {
            k: 0,
            adiabatic_error: self.baseline.adiabatic_error,
        }];
        let mut failure = None;
        let outcome = optimize(&spsa, &objective, &start, |state| {
            if marks.binary_search(&state.k).is_ok() {
                match objective
                    .schedule(&state.params)
                    .map_err(HarnessError::from)
                    .and_then(|s| self.adiabatic_error_of(&s))
                {
                    Ok(d) => checkpoints.push(Checkpoint {
                        k: state.k,
                        adiabatic_error: d,
                    }),
                    Err(e) => failure = Some(e),
                }
            }
            Ok(())
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        let selected = objective.schedule(outcome.selected_params())?;
        let (d, p, gap) = self.evaluate(&selected)?;
        Ok(RealizationRecord {
            index,
            seed,
            gains,
            selected: outcome.selected,
            final_score: outcome.final_score,
            best_score: outcome.best_score,
            experiments: outcome.experiments,
            rescore_experiments: outcome.rescore_experiments,
            adiabatic_error: d,
            probability: p,
            delta_min: gap,
            checkpoints,
            params: outcome.selected_params().to_vec(),
            trajectory: outcome.trajectory,
        })
    }

    /// Selected schedule of a recorded realization.
    pub fn schedule_of(
        &self,
        realization: &RealizationRecord,
    ) -> Result<ControlSchedule, HarnessError> {
        Ok(self
            .context
            .template()
            .with_free_params(&realization.params)?)
    }
}

/// Runs every realization on a pool of `jobs` threads; results are ordered
/// by realization index whatever the completion order.
pub fn run_prepared(
    prepared: &Prepared,
    jobs: usize,
    on_done: &(dyn Fn(&RealizationRecord) + Sync),
) -> Result<RunRecord, HarnessError> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let realizations: Vec<RealizationRecord> = pool.install(|| {
        (0..prepared.config.realizations)
            .into_par_iter()
            .map(|i| {
                let r = prepared.run_realization(i)?;
                on_done(&r);
                Ok(r)
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;
    let results: Vec<RealizationResult> = realizations
        .iter()
        .map(|r| RealizationResult {
            seed: r.seed,
            adiabatic_error: r.adiabatic_error,
            probability: r.probability,
            delta_min: r.delta_min,
        })
        .collect();
    let report = performance_report(&results, &prepared.baseline)?;
    Ok(RunRecord {
        config: prepared.config.clone(),
        config_hash: config_hash(&prepared.config),
        problem_hash: prepared.problem_hash.clone(),
        total_time: prepared.total_time,
        calibration: prepared.calibration,
        optimizer_steps: prepared.optimizer_evolution.steps,
        baseline: prepared.baseline,
        pilot_probability: prepared.pilot_probability,
        ground_unsampled: prepared.pilot_probability == 0.0,
        realizations,
        report,
        wall_clock: WallClock {
            started_unix,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            jobs: jobs.max(1),
        },
    })
}

pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<(Prepared, RunRecord), HarnessError> {
    let prepared = prepare(config)?;
    let record = run_prepared(&prepared, jobs, &|_| {})?;
    Ok((prepared, record))
}

/// Medians across several runs, e.g. one run per instance of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub alpha_d: f64,
    pub alpha_delta: f64,
    pub alpha_d_iqr: (f64, f64),
    pub alpha_delta_iqr: (f64, f64),
    #[serde(rename = "P_E0_median")]
    pub p_median: f64,
    #[serde(rename = "P_E0_lin_median")]
    pub p_lin_median: f64,
}

/// Lower medians of the per-run median `α_D`, `α_Δ` and `P(E_0)`.
pub fn ensemble_summary(records: &[RunRecord]) -> Option<EnsembleSummary> {
    if records.is_empty() {
        return None;
    }
    let col = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let ad = col(&|r| r.report.alpha_d);
    let ag = col(&|r| r.report.alpha_delta);
    Some(EnsembleSummary {
        runs: records.len(),
        alpha_d: lower_median(&ad),
        alpha_delta: lower_median(&ag),
        alpha_d_iqr: crate::analyzer::quartiles(&ad),
        alpha_delta_iqr: crate::analyzer::quartiles(&ag),
        p_median: lower_median(&col(&|r| r.report.p_median)),
        p_lin_median: lower_median(&col(&|r| r.report.p_lin)),
    })
}
