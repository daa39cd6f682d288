//! Gaussian-process Bayesian optimization with Expected Improvement.

use serde::{Deserialize, Serialize};

use super::{OptimizerResult, SearchSpace1D, Tracked};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoSettings {
    pub initial_points: usize,
    pub iterations: usize,
    /// Squared-exponential lengthscale, in the units of the search variable.
    pub lengthscale: f64,
    pub signal_variance: f64,
    /// Added to the kernel diagonal.
    pub noise: f64,
    pub xi: f64,
    pub grid: usize,
}

impl Default for BoSettings {
    fn default() -> Self {
        Self {
            initial_points: 5,
            iterations: 40,
            lengthscale: 0.12,
            signal_variance: 1.0,
            noise: 1e-10,
            xi: 0.01,
            grid: 2000,
        }
    }
}

/// Zero-mean GP posterior with a squared-exponential kernel.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    xs: Vec<f64>,
    lengthscale: f64,
    signal_variance: f64,
    /// Lower Cholesky factor of `K + noise I`, row-major.
    chol: Vec<f64>,
    /// `(K + noise I)^{-1} y`
    alpha: Vec<f64>,
}

impl GaussianProcess {
    pub fn fit(xs: &[f64], ys: &[f64], lengthscale: f64, signal_variance: f64, noise: f64) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "GP needs matching non-empty inputs, got {} x and {} y",
                xs.len(),
                ys.len()
            )));
        }
        let n = xs.len();
        let kern = |a: f64, b: f64| signal_variance * (-0.5 * ((a - b) / lengthscale).powi(2)).exp();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = kern(xs[i], xs[j]);
            }
            k[i * n + i] += noise;
        }
        let chol = cholesky(&k, n)?;
        let z = forward_sub(&chol, n, ys);
        let alpha = backward_sub_transposed(&chol, n, &z);
        Ok(Self { xs: xs.to_vec(), lengthscale, signal_variance, chol, alpha })
    }

    fn kern(&self, a: f64, b: f64) -> f64 {
        self.signal_variance * (-0.5 * ((a - b) / self.lengthscale).powi(2)).exp()
    }

    /// Posterior mean and variance at `x`.
    pub fn predict(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let kx: Vec<f64> = self.xs.iter().map(|&xi| self.kern(x, xi)).collect();
        let mean = kx.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = forward_sub(&self.chol, n, &kx);
        let var = self.signal_variance - v.iter().map(|t| t * t).sum::<f64>();
        (mean, var.max(0.0))
    }
}

fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::NumericalConditioning(format!(
                "kernel matrix not positive definite at pivot {j} (value {d:e})"
            )));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

fn forward_sub(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn backward_sub_transposed(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected Improvement for maximization with exploration offset `xi`.
pub fn expected_improvement(mean: f64, var: f64, f_best: f64, xi: f64) -> f64 {
    log_expected_improvement(mean, var, f_best, xi).exp()
}

/// `ln EI`, finite wherever `EI > 0` even when `EI` itself underflows.
///
/// `EI = σ h(z)` with `h(z) = z Φ(z) + φ(z)`. For `z` far in the lower tail
/// `h` is evaluated as `φ(z) (1 − t m(t))`, `t = −z`, with the Mills ratio
/// `m(t) = Φ(−t)/φ(t)` from its continued fraction.
pub fn log_expected_improvement(mean: f64, var: f64, f_best: f64, xi: f64) -> f64 {
    let sd = var.max(0.0).sqrt();
    if sd == 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = (mean - f_best - xi) / sd;
    let log_h = if z > -6.0 {
        (z * norm_cdf(z) + norm_pdf(z)).max(f64::MIN_POSITIVE).ln()
    } else {
        let t = -z;
        // 1 − t m(t) = m(t)·(1/m(t) − t), with 1/m(t) = t + K where K is the
        // continued-fraction tail 1/(t + 2/(t + 3/(t + …)))
        let mut tail = t;
        for k in (2..=40).rev() {
            tail = t + k as f64 / tail;
        }
        let k1 = 1.0 / tail;
        let mills = 1.0 / (t + k1);
        -0.5 * t * t - 0.5 * (2.0 * std::f64::consts::PI).ln() + (mills * k1).ln()
    };
    sd.ln() + log_h
}

pub fn bo_optimize(
    f: &dyn Fn(f64) -> f64,
    space: SearchSpace1D,
    cfg: &BoSettings,
    rng: &mut RngStream,
) -> Result<OptimizerResult> {
    let mut tracked = Tracked::new(f);
    let mut xs = Vec::with_capacity(cfg.initial_points + cfg.iterations);
    let mut ys = Vec::with_capacity(xs.capacity());
    for _ in 0..cfg.initial_points.max(1) {
        let x = rng.uniform_in(space.lo, space.hi);
        ys.push(tracked.eval(x));
        xs.push(x);
    }
    tracked.mark(0);

    let grid: Vec<f64> = (0..cfg.grid.max(2))
        .map(|i| space.lo + space.width() * i as f64 / (cfg.grid.max(2) - 1) as f64)
        .collect();

    for it in 1..=cfg.iterations {
        let gp = GaussianProcess::fit(&xs, &ys, cfg.lengthscale, cfg.signal_variance, cfg.noise)?;
        let f_best = tracked.best_f;
        let mut next = (grid[0], f64::NEG_INFINITY);
        for &g in &grid {
            let (m, v) = gp.predict(g);
            let ei = log_expected_improvement(m, v, f_best, cfg.xi);
            if ei > next.1 {
                next = (g, ei);
            }
        }
        ys.push(tracked.eval(next.0));
        xs.push(next.0);
        tracked.mark(it);
    }
    Ok(tracked.finish())
}
