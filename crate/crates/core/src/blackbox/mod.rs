//! Derivative-free maximizers for one-dimensional objectives.
//!
//! All three optimizers maximize `f` over a closed interval, own their random
//! stream, and report the best point seen together with a best-so-far trace.

mod bo;
mod cmaes;
mod pso;

pub use bo::{bo_optimize, expected_improvement, log_expected_improvement, BoSettings, GaussianProcess};
pub use cmaes::{cmaes_optimize, CmaesSettings};
pub use pso::{pso_optimize, PsoSettings};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::PhiParam;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchSpace1D {
    pub lo: f64,
    pub hi: f64,
}

impl SearchSpace1D {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidParameter(format!("search space needs lo < hi, got [{lo}, {hi}]")))
        }
    }

    /// `[ε, π/2 − ε]`, the circle-locus angle range.
    pub fn phi() -> Self {
        Self { lo: PhiParam::MIN, hi: PhiParam::MAX }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl Default for SearchSpace1D {
    fn default() -> Self {
        Self::phi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub best_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerResult {
    pub best_x: f64,
    pub best_f: f64,
    pub eval_count: usize,
    /// Iteration 0 is the initial design.
    pub trace: Vec<TraceEntry>,
}

/// Wraps an objective, counting calls and tracking the incumbent.
struct Tracked<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evals: usize,
    best_x: f64,
    best_f: f64,
    trace: Vec<TraceEntry>,
}

impl<'a> Tracked<'a> {
    fn new(f: &'a dyn Fn(f64) -> f64) -> Self {
        Self { f, evals: 0, best_x: f64::NAN, best_f: f64::NEG_INFINITY, trace: Vec::new() }
    }

    fn eval(&mut self, x: f64) -> f64 {
        let y = (self.f)(x);
        self.evals += 1;
        if y > self.best_f || self.best_x.is_nan() {
            self.best_f = y;
            self.best_x = x;
        }
        y
    }

    fn mark(&mut self, iteration: usize) {
        self.trace.push(TraceEntry { iteration, best_f: self.best_f });
    }

    fn finish(self) -> OptimizerResult {
        OptimizerResult {
            best_x: self.best_x,
            best_f: self.best_f,
            eval_count: self.evals,
            trace: self.trace,
        }
    }
}
