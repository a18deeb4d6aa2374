//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 4 7` runs a subset. Long optimization runs
//! are cached under the cargo target tmp dir and reused while their config and
//! prepared problem are unchanged. Failures are reported, and turn into a
//! nonzero exit only with `CLOAQC_ACCEPTANCE_STRICT=1` so that the rest of the
//! workspace tests still run.

use std::cell::Cell;
use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cloaqc::analyzer::{
    adiabatic_error, final_state, gap_scan, ground_state_probability, EvolutionPolicy,
    DEFAULT_GAP_GRID,
};
use cloaqc::harness::{
    ensemble_summary, load_record, prepare, run_prepared, write_run, ExperimentConfig,
    InstanceSource, NoiseSpec, ProblemSpec, RunRecord,
};
use cloaqc::problems::{
    compile_2sat, generate_usa_instance, GroverControls, IntermediateKind, ProblemContext,
    Scenario, DEFAULT_RETRY_BUDGET,
};
use cloaqc::qsim::{
    evolve, evolve_observed, trace_norm_distance, AdiabaticHamiltonian, Axis, Channel,
    EvolutionConfig, Method, Operator, QuantumState, RampKind,
};
use cloaqc::schedules::{
    grad_j_ad, j_ad, local_adiabatic_schedule, ControlSchedule, DEFAULT_BRACKET_POINTS,
};
use cloaqc::seeds::derive_seed;
use cloaqc::spsa::{optimize, spsa_gradient, spsa_gradient_with, Objective, SpsaConfig, SpsaError};

type Res<T> = Result<T, Box<dyn Error>>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).expect("bundled config parses")
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cache_root() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

/// Runs `cfg`, or reuses the record cached under `name` when it was produced
/// from the same config and the same prepared problem.
fn cached_run(cfg: &ExperimentConfig, name: &str) -> Res<RunRecord> {
    let dir = cache_root().join(name);
    let prepared = prepare(cfg)?;
    if let Ok(rec) = load_record(&dir) {
        if rec.config == *cfg
            && rec.problem_hash == prepared.problem_hash
            && rec.total_time == prepared.total_time
            && rec.baseline == prepared.baseline
        {
            return Ok(rec);
        }
    }
    let started = Instant::now();
    let rec = run_prepared(&prepared, jobs(), &|_| {})?;
    write_run(&prepared, &rec, &dir)?;
    eprintln!("  ran {name} in {:.0} s", started.elapsed().as_secs_f64());
    Ok(rec)
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn random_pauli_sum(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> Operator {
    let mut op = Operator::zero(n);
    for _ in 0..terms {
        let factors: Vec<(usize, Axis)> = (0..n)
            .filter_map(|q| match rng.gen_range(0..4) {
                1 => Some((q, Axis::X)),
                2 => Some((q, Axis::Y)),
                3 => Some((q, Axis::Z)),
                _ => None,
            })
            .collect();
        let term = Operator::pauli_term(n, &factors)
            .unwrap()
            .scaled(rng.gen_range(-1.0..1.0));
        op = op.plus(&term).unwrap();
    }
    op
}

/// Two random Pauli sums driven by a random cubic schedule on random `T`.
fn random_problem(n: usize, rng: &mut ChaCha8Rng) -> (AdiabaticHamiltonian, ControlSchedule, f64) {
    let h = AdiabaticHamiltonian::new(
        vec![random_pauli_sum(n, 6, rng), random_pauli_sum(n, 6, rng)],
        vec![Channel::Control(0), Channel::Control(1)],
    )
    .unwrap();
    let weights = (0..8).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let sched = ControlSchedule::from_weights(2, 4, weights, vec![]).unwrap();
    (h, sched, rng.gen_range(1.0..5.0))
}

fn criterion_1() -> Res<Verdict> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [2usize, 4, 6, 8] {
        let ctx = ProblemContext::grover(n, (1 << n) - 1, GroverControls::One, 5)?;
        let scan = gap_scan(ctx.hamiltonian(), &ctx.linear_schedule(), DEFAULT_GAP_GRID)?;
        let want = (1.0 / (1u64 << n) as f64).sqrt();
        worst = worst.max((scan.delta_min - want).abs());
        parts.push(format!("n={n}: {:.9}", scan.delta_min));
    }
    Ok(verdict(
        worst < 1e-6,
        format!("{} (max |Δ_min − N^-1/2| = {worst:.1e})", parts.join(", ")),
    ))
}

fn criterion_2() -> Res<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut distance: f64 = 0.0;
    for i in 0..20 {
        let n = 1 + i % 4;
        let (h, sched, t) = random_problem(n, &mut rng);
        let init = QuantumState::uniform(n);
        let a = evolve(
            &h,
            &sched,
            &EvolutionConfig::new(t, 4000, Method::Rk4)?,
            &init,
        )?;
        let b = evolve(
            &h,
            &sched,
            &EvolutionConfig::new(t, 40_000, Method::ExactPropagator)?,
            &init,
        )?;
        worst = worst.max(1.0 - a.inner(&b)?.norm());
        distance = distance.max(trace_norm_distance(&a, &b)?);
    }
    Ok(verdict(
        worst < 1e-6,
        format!("20 problems, max 1 − |⟨ψ_rk4|ψ_exact⟩| = {worst:.1e}, max trace distance {distance:.1e}"),
    ))
}

/// `½ λᵀAλ + bᵀλ`.
struct Quadratic {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Quadratic {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + bi)
            .collect()
    }
}

impl Objective for Quadratic {
    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn evaluate(&self, x: &[f64], _: usize, _: u64) -> Result<f64, SpsaError> {
        let quad: f64 = self
            .a
            .iter()
            .zip(x)
            .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>())
            .sum();
        Ok(0.5 * quad + self.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>())
    }
}

/// `Σ_i exp(c_i λ_i) + sin(λ_0 λ_1 + λ_2)`, smooth with nonzero third derivatives.
struct Smooth {
    c: Vec<f64>,
}

impl Smooth {
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let cos = (x[0] * x[1] + x[2]).cos();
        let mut g: Vec<f64> = self
            .c
            .iter()
            .zip(x)
            .map(|(c, x)| c * (c * x).exp())
            .collect();
        g[0] += x[1] * cos;
        g[1] += x[0] * cos;
        g[2] += cos;
        g
    }
}

impl Objective for Smooth {
    fn dimension(&self) -> usize {
        self.c.len()
    }

    fn evaluate(&self, x: &[f64], _: usize, _: u64) -> Result<f64, SpsaError> {
        Ok(self
            .c
            .iter()
            .zip(x)
            .map(|(c, x)| (c * x).exp())
            .sum::<f64>()
            + (x[0] * x[1] + x[2]).sin())
    }
}

struct Exp;

impl Objective for Exp {
    fn dimension(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &[f64], _: usize, _: u64) -> Result<f64, SpsaError> {
        Ok(x[0].exp())
    }
}

/// The first-order part `Σ_j g_jΔ_j / Δ_i` of an estimate along `Δ`.
fn first_order(g: &[f64], delta: &[f64]) -> Vec<f64> {
    let dot: f64 = g.iter().zip(delta).map(|(a, b)| a * b).sum();
    delta.iter().map(|d| dot / d).collect()
}

fn criterion_3() -> Res<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 4;
    let mut a = vec![vec![0.0; dim]; dim];
    for (i, j) in (0..dim).flat_map(|i| (0..=i).map(move |j| (i, j))) {
        let v = rng.gen_range(-1.0..1.0);
        a[i][j] = v;
        a[j][i] = v;
    }
    let q = Quadratic {
        a,
        b: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    };
    let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g = q.gradient(&x);

    // curvature-free: every draw is exactly its first-order part, for any β
    let mut draw_err: f64 = 0.0;
    for seed in 0..200u64 {
        let beta = 0.01 + 0.5 * (seed % 7) as f64;
        let est = spsa_gradient(&q, &x, beta, 1, seed)?;
        for (e, l) in est.gradient.iter().zip(first_order(&g, &est.delta)) {
            draw_err = draw_err.max((e - l).abs());
        }
    }
    // and the mean over all 2^dim perturbations is the gradient
    let mut mean = vec![0.0; dim];
    for pattern in 0..1u32 << dim {
        let delta: Vec<f64> = (0..dim)
            .map(|i| if pattern >> i & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let est = spsa_gradient_with(&q, &x, 0.3, &delta, 1, (0, 0))?;
        for (m, e) in mean.iter_mut().zip(&est.gradient) {
            *m += e / (1u32 << dim) as f64;
        }
    }
    let mean_err = mean
        .iter()
        .zip(&g)
        .map(|(m, g)| (m - g).abs())
        .fold(0.0, f64::max);

    // one dimension has a closed form: (e^{x+β} − e^{x−β}) / 2β = e^x sinh β / β
    let closed_err = (spsa_gradient_with(&Exp, &[0.4], 0.2, &[1.0], 1, (0, 0))?.gradient[0]
        - 0.4f64.exp() * 0.2f64.sinh() / 0.2)
        .abs();

    // general smooth case: mean bias over 10⁴ draws per β, with the
    // zero-mean first-order part subtracted as a control variate
    let s = Smooth {
        c: vec![0.7, -1.1, 0.4],
    };
    let xs = [0.3, -0.2, 0.5];
    let gs = s.gradient(&xs);
    let betas = [0.32, 0.16, 0.08, 0.04, 0.02];
    let draws = 10_000u64;
    let mut bias = Vec::new();
    for &beta in &betas {
        let mut acc = [0.0; 3];
        for seed in 0..draws {
            let est = spsa_gradient(&s, &xs, beta, 1, seed)?;
            for ((a, e), l) in acc
                .iter_mut()
                .zip(&est.gradient)
                .zip(first_order(&gs, &est.delta))
            {
                *a += (e - l) / draws as f64;
            }
        }
        bias.push(acc.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let lx: Vec<f64> = betas.iter().map(|b| b.ln()).collect();
    let ly: Vec<f64> = bias.iter().map(|b| b.ln()).collect();
    let fit = slope(&lx, &ly);

    let pass =
        draw_err < 1e-10 && mean_err < 1e-12 && closed_err < 1e-12 && (fit - 2.0).abs() <= 0.3;
    Ok(verdict(
        pass,
        format!(
            "quadratic draw error {draw_err:.1e}, exact mean error {mean_err:.1e}, closed-form error {closed_err:.1e}, bias slope {fit:.3}"
        ),
    ))
}

fn criterion_4() -> Res<Verdict> {
    let cfg = config(include_str!("../../../configs/grover_convergence.toml"));
    let rec = cached_run(&cfg, "grover_convergence")?;
    let medians = rec.median_checkpoints();
    let increases: Vec<String> = medians
        .windows(2)
        .filter(|w| w[1].1 > w[0].1)
        .map(|w| format!("{}→{}", w[0].0, w[1].0))
        .collect();
    let fit: Vec<(f64, f64)> = medians
        .iter()
        .filter(|(k, _)| *k >= 1)
        .map(|(k, d)| ((*k as f64).ln(), d.ln()))
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
    let gamma = -slope(&lx, &ly);
    let d_lin = rec.baseline.adiabatic_error;
    let final_d = rec.report.d_cloaqc;
    let p_lin = rec.baseline.probability;
    let calibrated = (p_lin - 0.40).abs() <= 0.01;
    let pass = calibrated && increases.is_empty() && final_d <= 0.1 * d_lin && gamma > 0.0;
    Ok(verdict(
        pass,
        format!(
            "T = {:.4} (P_lin = {p_lin:.4}), median D {d_lin:.4} → {final_d:.4} (ratio {:.3}, need ≤ 0.1), γ = {gamma:.3}, checkpoint increases: {}",
            rec.total_time,
            final_d / d_lin,
            if increases.is_empty() { "none".to_string() } else { increases.join(" ") }
        ),
    ))
}

fn criterion_5() -> Res<Verdict> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [2usize, 4] {
        let ctx = ProblemContext::grover(n, 1, GroverControls::One, 5)?;
        let scan = gap_scan(ctx.hamiltonian(), &ctx.linear_schedule(), 20_001)?;
        let total = local_adiabatic_schedule(&scan.grid, 2001)?.total();
        let big_n = (1u64 << n) as f64;
        let closed = big_n / (big_n - 1.0).sqrt() * (big_n - 1.0).sqrt().atan();
        worst = worst.max((total - closed).abs());
        parts.push(format!("N={big_n}: {total:.8} vs {closed:.8}"));
    }
    let cfg = config(include_str!("../../../configs/grover_convergence.toml"));
    let prepared = prepare(&cfg)?;
    let linear = prepared.context.linear_schedule();
    let scan = gap_scan(prepared.context.hamiltonian(), &linear, 20_001)?;
    let clock = local_adiabatic_schedule(&scan.grid, 2001)?;
    let d_la = prepared.adiabatic_error_of(&clock.compose(linear))?;
    let d_lin = prepared.baseline.adiabatic_error;
    Ok(verdict(
        worst < 1e-6 && d_la < d_lin,
        format!(
            "{}; n=4 at T = {:.4}: D_local = {d_la:.4}, D_linear = {d_lin:.4}",
            parts.join(", "),
            prepared.total_time
        ),
    ))
}

/// Reference values for the XX intermediate Hamiltonian, one and two ICs.
const REFERENCE_ALPHA_D: [f64; 2] = [0.065, 0.014];
const REFERENCE_ALPHA_DELTA: [f64; 2] = [1.0, 1.735];
const MAX2SAT_INSTANCES: usize = 20;
const MAX2SAT_INSTANCE_SEED: u64 = 2024;

fn criterion_6() -> Res<Verdict> {
    let base = config(include_str!("../../../configs/max2sat_ensemble.toml"));
    let mut summaries = Vec::new();
    for scenario in [Scenario::One, Scenario::Two] {
        let mut records = Vec::new();
        for i in 0..MAX2SAT_INSTANCES {
            let mut cfg = base.clone();
            cfg.problem = ProblemSpec::Max2sat {
                source: InstanceSource::Generate {
                    n: 6,
                    seed: derive_seed(MAX2SAT_INSTANCE_SEED, &[i as u64]) >> 1,
                },
                scenario,
                intermediate: IntermediateKind::Xx,
            };
            let rec = cached_run(&cfg, &format!("max2sat_s{}_i{i:02}", u8::from(scenario)))?;
            eprintln!(
                "  scenario {} instance {i:2}: alpha_D = {:.4}  alpha_Delta = {:.4}",
                u8::from(scenario),
                rec.report.alpha_d,
                rec.report.alpha_delta
            );
            records.push(rec);
        }
        summaries.push(ensemble_summary(&records).expect("non-empty ensemble"));
    }
    let (s1, s2) = (&summaries[0], &summaries[1]);
    let pass = s1.alpha_d < 0.5 && s2.alpha_d < s1.alpha_d && s2.alpha_delta > 1.2;
    Ok(verdict(
        pass,
        format!(
            "scenario 1: (α_D, α_Δ) = ({:.3}, {:.3}), scenario 2: ({:.3}, {:.3}); reference ({}, {}) and ({}, {})",
            s1.alpha_d,
            s1.alpha_delta,
            s2.alpha_d,
            s2.alpha_delta,
            REFERENCE_ALPHA_D[0],
            REFERENCE_ALPHA_DELTA[0],
            REFERENCE_ALPHA_D[1],
            REFERENCE_ALPHA_DELTA[1]
        ),
    ))
}

fn criterion_7() -> Res<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (text, name, target, need) in [
        (
            include_str!("../../../configs/grover_runtime_p050.toml"),
            "grover_runtime_p050",
            0.50,
            0.90,
        ),
        (
            include_str!("../../../configs/grover_runtime_p038.toml"),
            "grover_runtime_p038",
            0.38,
            0.85,
        ),
    ] {
        let rec = cached_run(&config(text), name)?;
        let p_lin = rec.baseline.probability;
        let p = rec.report.p_median;
        pass &= (p_lin - target).abs() <= 0.01 && p >= need;
        parts.push(format!(
            "P_lin = {p_lin:.4} → median P = {p:.4} (need ≥ {need})"
        ));
    }
    Ok(verdict(pass, parts.join("; ")))
}

const NOISE_LADDER: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];
const NOISE_SEED: u64 = 7;

fn criterion_8() -> Res<Verdict> {
    let base = config(include_str!("../../../configs/grover_noise.toml"));
    let with_noise = |strength: f64| {
        let mut cfg = base.clone();
        cfg.noise = Some(NoiseSpec {
            kind: RampKind::Sine,
            strength,
            seed: NOISE_SEED,
        });
        cfg
    };
    let clean = prepare(&base)?;
    let d_clean = clean.baseline.adiabatic_error;
    // every ladder strength whose noise keeps the linear D below 2× the clean
    // value counts as small, and each must be beaten
    let mut robust = true;
    let mut parts = Vec::new();
    for c in NOISE_LADDER {
        let cfg = with_noise(c);
        let d_noisy = prepare(&cfg)?.baseline.adiabatic_error;
        if d_noisy >= 2.0 * d_clean {
            parts.push(format!("C = {c}: skipped, linear D {d_noisy:.4}"));
            continue;
        }
        let rec = cached_run(&cfg, &format!("grover_noise_c{c}"))?;
        robust &= rec.report.d_cloaqc < d_noisy;
        parts.push(format!(
            "C = {c}: linear D {d_noisy:.4}, median D {:.4}",
            rec.report.d_cloaqc
        ));
    }

    let clean_run = run_prepared(&clean, jobs(), &|_| {})?;
    let zero_run = run_prepared(&prepare(&with_noise(0.0))?, jobs(), &|_| {})?;
    let identical = zero_run.realizations == clean_run.realizations
        && zero_run.baseline == clean_run.baseline
        && zero_run.report == clean_run.report;
    Ok(verdict(
        robust && identical,
        format!(
            "sine ramp, clean linear D {d_clean:.4}; {}; C = 0 bit-identical: {identical}",
            parts.join(", ")
        ),
    ))
}

/// Counts objective calls and the samples they consume.
struct Counting<'a, O> {
    inner: &'a O,
    samples: Cell<u64>,
}

impl<O: Objective> Objective for Counting<'_, O> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&self, params: &[f64], samples: usize, seed: u64) -> Result<f64, SpsaError> {
        self.samples.set(self.samples.get() + samples as u64);
        self.inner.evaluate(params, samples, seed)
    }

    fn penalty_gradient(&self, params: &[f64]) -> Result<Vec<f64>, SpsaError> {
        self.inner.penalty_gradient(params)
    }
}

fn criterion_9() -> Res<Verdict> {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // norm conservation at every grid point, all integrators
    let mut norm_dev: f64 = 0.0;
    for n in 1..=4 {
        let (h, sched, t) = random_problem(n, &mut rng);
        for (method, steps) in [
            (Method::Rk4, 4000),
            (Method::ExactPropagator, 2000),
            (Method::Magnus4, 400),
        ] {
            evolve_observed(
                &h,
                &sched,
                &EvolutionConfig::new(t, steps, method)?,
                &QuantumState::uniform(n),
                |_, psi| {
                    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                    norm_dev = norm_dev.max((norm - 1.0).abs());
                },
            )?;
        }
    }
    if norm_dev >= 1e-9 {
        failures.push(format!("norm deviation {norm_dev:.1e}"));
    }

    // boundary values of the physical controls survive arbitrary free parameters
    let instance = generate_usa_instance(4, 1, DEFAULT_RETRY_BUDGET)?;
    let mut contexts = vec![
        (
            ProblemContext::grover(3, 2, GroverControls::One, 5)?,
            vec![(1.0, 0.0), (0.0, 1.0)],
        ),
        (
            ProblemContext::grover(3, 2, GroverControls::Two, 5)?,
            vec![(1.0, 0.0), (0.0, 1.0)],
        ),
    ];
    for scenario in [
        Scenario::One,
        Scenario::Two,
        Scenario::Three,
        Scenario::Four,
    ] {
        contexts.push((
            ProblemContext::max2sat(&instance, scenario, IntermediateKind::Xx, 5)?,
            vec![(1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (0.0, 1.0)],
        ));
    }
    let mut constraint_dev: f64 = 0.0;
    for (ctx, ends) in &contexts {
        for _ in 0..200 {
            let free: Vec<f64> = (0..ctx.template().free_param_count())
                .map(|_| rng.gen_range(-10.0..10.0))
                .collect();
            let sched = ctx.template().with_free_params(&free)?;
            for (x, (start, end)) in ctx
                .physical_values(&sched, 0.0)
                .iter()
                .zip(ctx.physical_values(&sched, 1.0))
                .zip(ends)
            {
                constraint_dev = constraint_dev
                    .max((x.0 - start).abs())
                    .max((x.1 - end).abs());
            }
        }
    }
    if constraint_dev >= 1e-12 {
        failures.push(format!("boundary deviation {constraint_dev:.1e}"));
    }

    // P(E_0) + D² = 1 on evolved states
    let policy = EvolutionPolicy::default();
    let mut pd_dev: f64 = 0.0;
    for (ctx, _) in &contexts {
        let free: Vec<f64> = (0..ctx.template().free_param_count())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let sched = ctx.template().with_free_params(&free)?;
        let (psi, _) = final_state(ctx.hamiltonian(), &sched, ctx.initial_state(), 2.5, &policy)?;
        let p = ground_state_probability(&psi, ctx.problem_hamiltonian())?;
        let d = adiabatic_error(&psi, ctx.problem_hamiltonian())?;
        pd_dev = pd_dev.max((p + d * d - 1.0).abs());
    }
    if pd_dev >= 1e-10 {
        failures.push(format!("|P + D² − 1| = {pd_dev:.1e}"));
    }

    // grad J_ad against central differences on schedules with monotone
    // channels; two-IC Grover and scenario 2 have no pinned-flat channel
    let mut grad_err: f64 = 0.0;
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 && attempts < 10_000 {
        attempts += 1;
        let ctx = &contexts[if attempts % 2 == 0 { 1 } else { 3 }].0;
        let free: Vec<f64> = (0..ctx.template().free_param_count())
            .map(|_| rng.gen_range(-0.3..0.3))
            .collect();
        let sched = ctx.template().with_free_params(&free)?;
        let monotone = (0..sched.channels()).all(|c| {
            let d: Vec<f64> = (0..=2000)
                .map(|i| sched.derivative(c, i as f64 / 2000.0))
                .collect();
            d.iter().all(|v| *v > 1e-3) || d.iter().all(|v| *v < -1e-3)
        });
        if !monotone {
            continue;
        }
        checked += 1;
        let analytic = grad_j_ad(&sched);
        let h = 1e-6;
        for i in 0..free.len() {
            let mut up = free.clone();
            let mut down = free.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (j_ad(
                &ctx.template().with_free_params(&up)?,
                DEFAULT_BRACKET_POINTS,
            ) - j_ad(
                &ctx.template().with_free_params(&down)?,
                DEFAULT_BRACKET_POINTS,
            )) / (2.0 * h);
            grad_err = grad_err.max((analytic[i] - fd).abs() / fd.abs().max(1.0));
        }
    }
    if checked < 20 || grad_err >= 1e-3 {
        failures.push(format!(
            "grad J_ad relative error {grad_err:.1e} over {checked} schedules"
        ));
    }

    // USA instances by enumeration, and their Ising energy has the same unique minimum
    for seed in 0..30u64 {
        let n = 3 + (seed % 4) as usize;
        let inst = generate_usa_instance(n, seed, DEFAULT_RETRY_BUDGET)?;
        let satisfying: Vec<usize> = (0..1usize << n)
            .filter(|&a| inst.clauses.iter().all(|c| c.satisfied_by(a, n)))
            .collect();
        let (p1, p2) = compile_2sat(&inst);
        let energy: Vec<f64> = match (p1.diagonal_entries(), p2.diagonal_entries()) {
            (Some(a), Some(b)) => a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            _ => {
                failures.push(format!(
                    "instance n={n} seed={seed} compiled to a non-diagonal operator"
                ));
                continue;
            }
        };
        let min = energy.iter().cloned().fold(f64::INFINITY, f64::min);
        let argmins: Vec<usize> = (0..energy.len())
            .filter(|&a| energy[a] - min < 1e-9)
            .collect();
        if satisfying.len() != 1 || argmins != satisfying {
            failures.push(format!(
                "instance n={n} seed={seed} is not USA by enumeration"
            ));
        }
    }

    // 2MK experiments plus 8M for re-scoring
    let grover = ProblemContext::grover(2, 1, GroverControls::One, 5)?;
    let objective = cloaqc::spsa::ScheduleObjective::simulated(
        &grover,
        EvolutionConfig::new(2.0, 64, Method::Magnus4)?,
    )?;
    let counting = Counting {
        inner: &objective,
        samples: Cell::new(0),
    };
    let (k, m) = (13usize, 7usize);
    let out = optimize(
        &SpsaConfig::new(0.05, 0.2, 0.0, k, m, 4),
        &counting,
        &vec![0.0; counting.dimension()],
        |_| Ok(()),
    )?;
    let expected = (2 * m * k) as u64;
    if out.experiments != expected
        || counting.samples.get() != expected + 8 * m as u64
        || out.rescore_experiments != 8 * m as u64
    {
        failures.push(format!(
            "accounting: reported {} + {}, simulator saw {}",
            out.experiments,
            out.rescore_experiments,
            counting.samples.get()
        ));
    }

    Ok(verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "norm {norm_dev:.1e}, boundaries {constraint_dev:.1e}, P + D² {pd_dev:.1e}, grad J_ad {grad_err:.1e}, 30 USA instances, 2MK = {expected} + {}",
                8 * m
            )
        } else {
            failures.join("; ")
        },
    ))
}

type Criterion = fn() -> Res<Verdict>;

const CRITERIA: [(&str, Criterion); 9] = [
    ("Grover gap law", criterion_1),
    ("RK4 vs exact propagator", criterion_2),
    ("SPSA estimator", criterion_3),
    ("Grover n=4 convergence", criterion_4),
    ("local-adiabatic reference", criterion_5),
    ("MAX 2-SAT desk-scale ensemble", criterion_6),
    ("runtime sweep", criterion_7),
    ("noise robustness", criterion_8),
    ("invariant suite", criterion_9),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let strict = std::env::var("CLOAQC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut passed = 0;
    let mut ran = 0;
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let v = run().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        passed += usize::from(v.pass);
        println!(
            "criterion {number} {}: {name} ({:.1} s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {passed}/{ran} criteria pass");
    if strict && passed < ran {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
