use serde::{Deserialize, Serialize};

use super::{OptimizerResult, SearchSpace1D, Tracked};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoSettings {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Initial velocities are drawn from `U[-v0, v0]`.
    pub v0: f64,
}

impl Default for PsoSettings {
    fn default() -> Self {
        Self { particles: 30, iterations: 120, inertia: 0.72, c1: 1.49, c2: 1.49, v0: 0.05 }
    }
}

/// Global-best particle swarm with position clipping.
///
/// Draw order: all initial positions, then all initial velocities, then per
/// iteration and per particle `r1` followed by `r2`. The global best is
/// refreshed once per sweep over the swarm.
pub fn pso_optimize(
    f: &dyn Fn(f64) -> f64,
    space: SearchSpace1D,
    cfg: &PsoSettings,
    rng: &mut RngStream,
) -> OptimizerResult {
    let n = cfg.particles.max(1);
    let mut tracked = Tracked::new(f);

    let mut x: Vec<f64> = (0..n).map(|_| rng.uniform_in(space.lo, space.hi)).collect();
    let mut v: Vec<f64> = (0..n).map(|_| rng.uniform_in(-cfg.v0, cfg.v0)).collect();
    let mut p_best_x = x.clone();
    let mut p_best_f: Vec<f64> = x.iter().map(|&xi| tracked.eval(xi)).collect();
    let (mut g_x, mut g_f) = best_of(&p_best_x, &p_best_f);
    tracked.mark(0);

    for it in 1..=cfg.iterations {
        for i in 0..n {
            let r1 = rng.uniform();
            let r2 = rng.uniform();
            v[i] = cfg.inertia * v[i] + cfg.c1 * r1 * (p_best_x[i] - x[i]) + cfg.c2 * r2 * (g_x - x[i]);
            x[i] = space.clip(x[i] + v[i]);
            let fi = tracked.eval(x[i]);
            if fi > p_best_f[i] {
                p_best_f[i] = fi;
                p_best_x[i] = x[i];
            }
        }
        let (bx, bf) = best_of(&p_best_x, &p_best_f);
        if bf > g_f {
            g_x = bx;
            g_f = bf;
        }
        tracked.mark(it);
    }
    tracked.finish()
}

fn best_of(xs: &[f64], fs: &[f64]) -> (f64, f64) {
    let mut best = (xs[0], fs[0]);
    for (&x, &f) in xs.iter().zip(fs) {
        if f > best.1 {
            best = (x, f);
        }
    }
    best
}
