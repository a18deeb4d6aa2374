use serde::{Deserialize, Serialize};

use super::SpsaError;

pub const DEFAULT_DELTA: f64 = 0.602;
pub const DEFAULT_ZETA: f64 = 0.101;
pub const DEFAULT_LAMBDA_AD: f64 = 0.005;

/// Gains and budget of one SPSA run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub alpha0: f64,
    pub beta0: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: f64,
    pub zeta: f64,
    pub lambda_ad: f64,
    /// Iteration budget.
    #[serde(rename = "K")]
    pub k: usize,
    /// Measurements per energy estimate.
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
}

impl SpsaConfig {
    /// Default exponents and penalty weight with explicit gains.
    pub fn new(alpha0: f64, beta0: f64, r: f64, k: usize, m: usize, seed: u64) -> Self {
        Self {
            alpha0,
            beta0,
            r,
            delta: DEFAULT_DELTA,
            zeta: DEFAULT_ZETA,
            lambda_ad: DEFAULT_LAMBDA_AD,
            k,
            m,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SpsaError> {
        let bad = |what: String| Err(SpsaError::Config(what));
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return bad(format!("alpha0 must be positive, got {}", self.alpha0));
        }
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return bad(format!("beta0 must be positive, got {}", self.beta0));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return bad(format!("R must be non-negative, got {}", self.r));
        }
        if !(self.delta > 0.5 && self.delta <= 1.0) {
            return bad(format!("delta must lie in (0.5, 1], got {}", self.delta));
        }
        if !(self.zeta > 0.0 && self.zeta < 0.5) {
            return bad(format!("zeta must lie in (0, 0.5), got {}", self.zeta));
        }
        if !(self.lambda_ad >= 0.0 && self.lambda_ad.is_finite()) {
            return bad(format!(
                "lambda_ad must be non-negative, got {}",
                self.lambda_ad
            ));
        }
        if self.m == 0 {
            return bad("M must be at least 1".into());
        }
        Ok(())
    }
}

/// `(α_k, β_k) = (α_0/(k+1+R)^δ, β_0/(k+1)^ζ)`.
pub fn gains(cfg: &SpsaConfig, k: usize) -> (f64, f64) {
    let k = k as f64;
    (
        cfg.alpha0 / (k + 1.0 + cfg.r).powf(cfg.delta),
        cfg.beta0 / (k + 1.0).powf(cfg.zeta),
    )
}
