//! One-dimensional (μ/μ_w, λ)-ES with rank-μ variance adaptation.
//!
//! In one dimension the covariance matrix and the global step size collapse
//! into a single variance, updated from the weighted squared steps of the
//! selected offspring:
//!
//! `σ² ← (1 − c_μ) σ² + c_μ Σ w_i (x_i − m_old)²`

use serde::{Deserialize, Serialize};

use super::{OptimizerResult, SearchSpace1D, Tracked};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmaesSettings {
    pub lambda: usize,
    pub mu: usize,
    pub iterations: usize,
    /// Initial step size as a fraction of the interval width.
    pub sigma0_frac: f64,
    pub c_mu: f64,
    pub sigma_min: f64,
    /// Upper step-size clip as a fraction of the interval width.
    pub sigma_max_frac: f64,
}

impl Default for CmaesSettings {
    fn default() -> Self {
        Self {
            lambda: 12,
            mu: 6,
            iterations: 60,
            sigma0_frac: 0.20,
            c_mu: 0.5,
            sigma_min: 1e-4,
            sigma_max_frac: 0.5,
        }
    }
}

/// Log-decreasing recombination weights `ln(μ + ½) − ln i`, normalized.
pub(crate) fn recombination_weights(mu: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn cmaes_optimize(
    f: &dyn Fn(f64) -> f64,
    space: SearchSpace1D,
    cfg: &CmaesSettings,
    rng: &mut RngStream,
) -> OptimizerResult {
    let lambda = cfg.lambda.max(1);
    let mu = cfg.mu.clamp(1, lambda);
    let weights = recombination_weights(mu);
    let sigma_max = cfg.sigma_max_frac * space.width();
    let mut tracked = Tracked::new(f);

    let mut mean = 0.5 * (space.lo + space.hi);
    let mut sigma = (cfg.sigma0_frac * space.width()).clamp(cfg.sigma_min, sigma_max);
    let mut pop: Vec<(f64, f64)> = Vec::with_capacity(lambda);

    for it in 0..cfg.iterations {
        pop.clear();
        for _ in 0..lambda {
            let x = space.clip(mean + sigma * rng.normal());
            pop.push((x, tracked.eval(x)));
        }
        // best first; stable sort keeps sampling order on ties
        pop.sort_by(|a, b| b.1.total_cmp(&a.1));
        let old = mean;
        mean = weights.iter().zip(&pop).map(|(w, (x, _))| w * x).sum();
        let spread: f64 = weights.iter().zip(&pop).map(|(w, (x, _))| w * (x - old).powi(2)).sum();
        let var = (1.0 - cfg.c_mu) * sigma * sigma + cfg.c_mu * spread;
        sigma = var.sqrt().clamp(cfg.sigma_min, sigma_max);
        tracked.mark(it + 1);
    }
    tracked.finish()
}
