use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analyzer::{CalibrationScan, EvolutionPolicy};
use crate::problems::{GroverControls, IntermediateKind, Scenario};
use crate::qsim::{Method, RampKind};
use crate::schedules::DEFAULT_BASIS_SIZE;
use crate::spsa::{GainRule, DEFAULT_DELTA, DEFAULT_LAMBDA_AD, DEFAULT_ZETA};

/// One experiment: a problem, how long to anneal, how to optimize and how many
/// independent realizations to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    pub runtime: RuntimeSpec,
    pub spsa: SpsaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub evolution: EvolutionSpec,
    pub realizations: usize,
    pub master_seed: u64,
    /// Output directory; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Grover {
        n: usize,
        marked: usize,
        #[serde(default = "default_grover_controls")]
        controls: GroverControls,
    },
    Max2sat {
        #[serde(flatten)]
        source: InstanceSource,
        scenario: Scenario,
        #[serde(default = "default_intermediate")]
        intermediate: IntermediateKind,
    },
}

/// Where a MAX 2-SAT instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// Instance JSON file; relative paths resolve against the config file.
    Instance(PathBuf),
    /// Generate a USA instance in memory.
    Generate { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub basis_size: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            basis_size: DEFAULT_BASIS_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuntimeSpec {
    Explicit {
        total_time: f64,
    },
    /// Shortest `T` at which the linear schedule reaches `P(E_0) = target_p`.
    Calibrate {
        target_p: f64,
        #[serde(default = "default_calibration_tolerance")]
        tolerance: f64,
        #[serde(default)]
        scan: CalibrationScan,
    },
    /// `T = t_delta / Δ_min` of the linear schedule.
    GapUnits {
        t_delta: f64,
    },
}

/// Optimizer settings. Unset gains come from the pilot rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaSpec {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default = "default_lambda_ad")]
    pub lambda_ad: f64,
    #[serde(default)]
    pub gains: GainRule,
}

impl SpsaSpec {
    /// All three gains given explicitly, so no pilot is needed.
    pub fn explicit_gains(&self) -> Option<(f64, f64, f64)> {
        Some((self.alpha0?, self.beta0?, self.r?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: RampKind,
    /// The ramp's `C`.
    pub strength: f64,
    /// Fixes the random directions `m̂_i`.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_start_steps")]
    pub start_steps: usize,
    /// Step-doubling tolerance for every analysis evolution.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// The optimizer runs on a fixed grid of this many times the grid
    /// certified for the linear schedule.
    #[serde(default = "default_optimizer_factor")]
    pub optimizer_step_factor: usize,
}

impl Default for EvolutionSpec {
    fn default() -> Self {
        Self {
            method: default_method(),
            start_steps: default_start_steps(),
            tol: default_tol(),
            optimizer_step_factor: default_optimizer_factor(),
        }
    }
}

impl EvolutionSpec {
    pub fn policy(&self) -> EvolutionPolicy {
        EvolutionPolicy {
            method: self.method,
            start_steps: self.start_steps,
            tol: self.tol,
        }
    }
}

fn default_grover_controls() -> GroverControls {
    GroverControls::One
}
fn default_intermediate() -> IntermediateKind {
    IntermediateKind::Xx
}
fn default_calibration_tolerance() -> f64 {
    0.01
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_zeta() -> f64 {
    DEFAULT_ZETA
}
fn default_lambda_ad() -> f64 {
    DEFAULT_LAMBDA_AD
}
fn default_method() -> Method {
    EvolutionPolicy::default().method
}
fn default_start_steps() -> usize {
    EvolutionPolicy::default().start_steps
}
fn default_tol() -> f64 {
    EvolutionPolicy::default().tol
}
fn default_optimizer_factor() -> usize {
    2
}

/// A config problem, with the 1-based line it was found on when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| refine_line(text, line_of(text, span.start), e.message()));
            HarnessError::Config(ConfigIssue {
                line,
                message: e.message().to_string(),
            })
        })?;
        cfg.validate_against(Some(text))?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(ConfigIssue {
                line: None,
                message: format!("cannot read {}: {e}", path.display()),
            })
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let ProblemSpec::Max2sat {
            source: InstanceSource::Instance(p),
            ..
        } = &mut self.problem
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut self.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.validate_against(None)
    }

    /// Semantic checks; `text` lets errors point at the offending line.
    fn validate_against(&self, text: Option<&str>) -> Result<(), HarnessError> {
        let fail = |key: &str, message: String| {
            Err(HarnessError::Config(ConfigIssue {
                line: text.and_then(|t| locate_key(t, key)),
                message,
            }))
        };
        // TOML integers are signed 64-bit, and records store the config as TOML
        let mut seeds = vec![("master_seed", self.master_seed)];
        if let ProblemSpec::Max2sat {
            source: InstanceSource::Generate { seed, .. },
            ..
        } = &self.problem
        {
            seeds.push(("seed", *seed));
        }
        if let Some(noise) = &self.noise {
            seeds.push(("seed", noise.seed));
        }
        if let Some((key, seed)) = seeds.into_iter().find(|(_, s)| *s > i64::MAX as u64) {
            return fail(key, format!("{key} {seed} exceeds {}", i64::MAX));
        }
        match &self.problem {
            ProblemSpec::Grover { n, marked, .. } => {
                if !(1..=12).contains(n) {
                    return fail("n", format!("grover n must lie in 1..=12, got {n}"));
                }
                if *marked >= 1 << n {
                    return fail(
                        "marked",
                        format!("marked state {marked} does not fit in {n} qubits"),
                    );
                }
            }
            ProblemSpec::Max2sat { source, .. } => {
                if let InstanceSource::Generate { n, .. } = source {
                    if !(2..=12).contains(n) {
                        return fail(
                            "generate",
                            format!("generated instances need 2 ≤ n ≤ 12, got {n}"),
                        );
                    }
                }
            }
        }
        if self.schedule.basis_size < 2 {
            return fail(
                "basis_size",
                format!(
                    "basis_size must be at least 2, got {}",
                    self.schedule.basis_size
                ),
            );
        }
        match self.runtime {
            RuntimeSpec::Explicit { total_time }
                if !(total_time > 0.0 && total_time.is_finite()) =>
            {
                return fail(
                    "total_time",
                    format!("total_time must be positive, got {total_time}"),
                );
            }
            RuntimeSpec::Calibrate {
                target_p,
                tolerance,
                ..
            } => {
                if !(target_p > 0.0 && target_p < 1.0) {
                    return fail(
                        "target_p",
                        format!("target_p must lie in (0, 1), got {target_p}"),
                    );
                }
                if !(tolerance > 0.0 && tolerance < 0.5) {
                    return fail(
                        "tolerance",
                        format!("tolerance must lie in (0, 0.5), got {tolerance}"),
                    );
                }
            }
            RuntimeSpec::GapUnits { t_delta } if !(t_delta > 0.0 && t_delta.is_finite()) => {
                return fail(
                    "t_delta",
                    format!("t_delta must be positive, got {t_delta}"),
                );
            }
            _ => {}
        }
        let s = &self.spsa;
        if s.m == 0 {
            return fail("M", "M must be at least 1".into());
        }
        for (key, v) in [("alpha0", s.alpha0), ("beta0", s.beta0)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(key, format!("{key} must be positive, got {v}"));
                }
            }
        }
        if let Some(r) = s.r {
            if !(r >= 0.0 && r.is_finite()) {
                return fail("R", format!("R must be non-negative, got {r}"));
            }
        }
        if !(s.delta > 0.5 && s.delta <= 1.0) {
            return fail(
                "delta",
                format!("delta must lie in (0.5, 1], got {}", s.delta),
            );
        }
        if !(s.zeta > 0.0 && s.zeta < 0.5) {
            return fail("zeta", format!("zeta must lie in (0, 0.5), got {}", s.zeta));
        }
        if !(s.lambda_ad >= 0.0 && s.lambda_ad.is_finite()) {
            return fail(
                "lambda_ad",
                format!("lambda_ad must be non-negative, got {}", s.lambda_ad),
            );
        }
        if let Some(noise) = &self.noise {
            if !(noise.strength >= 0.0 && noise.strength.is_finite()) {
                return fail(
                    "strength",
                    format!(
                        "noise strength must be non-negative, got {}",
                        noise.strength
                    ),
                );
            }
        }
        let e = &self.evolution;
        if e.start_steps < crate::qsim::MIN_STEPS {
            return fail(
                "start_steps",
                format!(
                    "start_steps must be at least {}, got {}",
                    crate::qsim::MIN_STEPS,
                    e.start_steps
                ),
            );
        }
        if !(e.tol > 0.0 && e.tol < 1.0) {
            return fail("tol", format!("tol must lie in (0, 1), got {}", e.tol));
        }
        if e.optimizer_step_factor == 0 {
            return fail(
                "optimizer_step_factor",
                "optimizer_step_factor must be at least 1".into(),
            );
        }
        if self.realizations == 0 {
            return fail("realizations", "realizations must be at least 1".into());
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Errors inside tagged tables are reported at the table header; point at
/// the key inside that table whose name the message mentions instead.
fn refine_line(text: &str, line: usize, message: &str) -> usize {
    let lines: Vec<&str> = text.lines().collect();
    if !lines
        .get(line - 1)
        .is_some_and(|l| l.trim_start().starts_with('['))
    {
        return line;
    }
    let words: Vec<&str> = message
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .collect();
    lines
        .iter()
        .enumerate()
        .skip(line)
        .take_while(|(_, l)| !l.trim_start().starts_with('['))
        .find(|(_, l)| {
            let key = l.split('=').next().unwrap_or("").trim();
            l.contains('=') && words.contains(&key)
        })
        .map_or(line, |(i, _)| i + 1)
}

/// First line that assigns `key`, as `key = ...` or an inline-table entry.
fn locate_key(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|line| {
            let code = line.split('#').next().unwrap_or("");
            code.split([',', '{']).any(|part| {
                part.split('=').next().map(str::trim) == Some(key) && part.contains('=')
            })
        })
        .map(|i| i + 1)
}
