use ndarray::ArrayView1;

use crate::rng::RngStream;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Guard inside `ln(1 − tanh² u + ε)`.
pub const SQUASH_EPS: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Diagonal Gaussian over pre-squash values, executed through `tanh`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquashedGaussian {
    pub mean: Vec<f64>,
    /// Already clamped.
    pub log_std: Vec<f64>,
    /// Whether the clamp was active per dimension (its gradient is then zero).
    pub clamped: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquashedSample {
    pub u: Vec<f64>,
    /// Standard-normal noise behind `u`.
    pub eps: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: f64,
}

/// Reads `[mean (d), raw log-std (d)]` from a network output row.
pub fn split_head(row: ArrayView1<f64>, d: usize) -> SquashedGaussian {
    let mean = row.iter().take(d).copied().collect();
    let raw: Vec<f64> = row.iter().skip(d).take(d).copied().collect();
    let clamped = raw.iter().map(|&l| !(LOG_STD_MIN..=LOG_STD_MAX).contains(&l)).collect();
    let log_std = raw.iter().map(|&l| l.clamp(LOG_STD_MIN, LOG_STD_MAX)).collect();
    SquashedGaussian { mean, log_std, clamped }
}

/// `Σ log N(u; μ, e^ℓ)`.
pub fn gaussian_log_prob(u: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    u.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((&u, &m), &l)| {
            let z = (u - m) * (-l).exp();
            -0.5 * z * z - l - 0.5 * LN_2PI
        })
        .sum()
}

/// `Σ ln(1 − tanh² u + ε)`, subtracted from the Gaussian term.
pub fn squash_correction(u: &[f64]) -> f64 {
    u.iter()
        .map(|&u| {
            let a = u.tanh();
            (1.0 - a * a + SQUASH_EPS).ln()
        })
        .sum()
}

impl SquashedGaussian {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|l| l.exp()).collect()
    }

    /// Deterministic action `tanh(μ)`.
    pub fn mode(&self) -> Vec<f64> {
        self.mean.iter().map(|m| m.tanh()).collect()
    }

    pub fn log_prob(&self, u: &[f64]) -> f64 {
        gaussian_log_prob(u, &self.mean, &self.log_std) - squash_correction(u)
    }

    /// Reparameterized draw `u = μ + σ ε`, one normal per dimension in order.
    pub fn sample(&self, rng: &mut RngStream) -> SquashedSample {
        let eps: Vec<f64> = (0..self.dim()).map(|_| rng.normal()).collect();
        self.sample_with(eps)
    }

    pub fn sample_with(&self, eps: Vec<f64>) -> SquashedSample {
        let u: Vec<f64> = self
            .mean
            .iter()
            .zip(&self.log_std)
            .zip(&eps)
            .map(|((&m, &l), &e)| m + l.exp() * e)
            .collect();
        let action = u.iter().map(|u| u.tanh()).collect();
        let log_prob = self.log_prob(&u);
        SquashedSample { u, eps, action, log_prob }
    }

    /// Entropy of the pre-squash Gaussian; a lower bound is set by the clamp.
    pub fn gaussian_entropy(&self) -> f64 {
        self.log_std.iter().map(|l| l + 0.5 * (1.0 + LN_2PI)).sum()
    }
}
