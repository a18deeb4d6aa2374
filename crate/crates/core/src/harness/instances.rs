use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::persist::write_atomic;
use super::HarnessError;
use crate::problems::{generate_usa_instance, ProblemInstance, DEFAULT_RETRY_BUDGET};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub path: PathBuf,
    pub instance: ProblemInstance,
}

/// Clause-count statistics of a generated ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub count: usize,
    pub n: usize,
    pub clauses_min: usize,
    pub clauses_max: usize,
    pub clauses_mean: f64,
    /// Mean `n / M_c`.
    pub variables_per_clause: f64,
    /// Mean `M_c / n`.
    pub clauses_per_variable: f64,
}

impl std::fmt::Display for DensitySummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} USA instances, n = {}: clauses {}..{} (mean {:.2}), mean n/M_c = {:.3}, mean M_c/n = {:.3}",
            self.count,
            self.n,
            self.clauses_min,
            self.clauses_max,
            self.clauses_mean,
            self.variables_per_clause,
            self.clauses_per_variable
        )
    }
}

/// Instance `i` is generated from `derive_seed(seed, [i])` and written to
/// `out/usa_n{n}_{i:03}.json`.
pub fn generate_instances(
    n: usize,
    count: usize,
    seed: u64,
    out: &Path,
) -> Result<(Vec<GeneratedInstance>, DensitySummary), HarnessError> {
    if count == 0 {
        return Err(HarnessError::config("count must be at least 1"));
    }
    let mut generated = Vec::with_capacity(count);
    for i in 0..count {
        let instance =
            generate_usa_instance(n, derive_seed(seed, &[i as u64]), DEFAULT_RETRY_BUDGET)?;
        let path = out.join(format!("usa_n{n}_{i:03}.json"));
        write_atomic(&path, instance.to_json().as_bytes())?;
        generated.push(GeneratedInstance { path, instance });
    }
    let counts: Vec<usize> = generated
        .iter()
        .map(|g| g.instance.clause_count())
        .collect();
    let mean = |f: &dyn Fn(&ProblemInstance) -> f64| {
        generated.iter().map(|g| f(&g.instance)).sum::<f64>() / count as f64
    };
    let summary = DensitySummary {
        count,
        n,
        clauses_min: *counts.iter().min().expect("count ≥ 1"),
        clauses_max: *counts.iter().max().expect("count ≥ 1"),
        clauses_mean: counts.iter().sum::<usize>() as f64 / count as f64,
        variables_per_clause: mean(&|i| i.variables_per_clause()),
        clauses_per_variable: mean(&|i| i.clauses_per_variable()),
    };
    Ok((generated, summary))
}
