//! WebAssembly bindings for the interactive demo in `www/`.
//!
//! Every export returns a flat `Float64Array` so the page can draw straight
//! from it. The plain Rust functions behind the exports carry the logic and
//! are what the tests exercise.

use morphopt::blackbox::{bo_optimize, cmaes_optimize, pso_optimize, BoSettings, CmaesSettings, PsoSettings, SearchSpace1D};
use morphopt::kinematics::{forward_kinematics, phi_to_lengths, w_norm_phi, JointConfig, Morphology, PhiParam};
use morphopt::reward::{circle_analytic_reward, evaluate, RewardWeights};
use morphopt::rl::{L_MAX, L_MIN};
use morphopt::rng::RngStream;
use morphopt::taskpath::{band_for, sample_path, TaskPath};
use thiserror::Error;
use wasm_bindgen::prelude::*;

#[derive(Debug, Error, PartialEq)]
pub enum DemoError {
    #[error("unknown task '{0}' (circle, ellipse, rect)")]
    UnknownTask(String),
    #[error("unknown optimizer '{0}' (pso, bo, cmaes)")]
    UnknownOptimizer(String),
    #[error("grid resolution must be between 2 and 400, got {0}")]
    Resolution(usize),
    #[error(transparent)]
    Model(#[from] morphopt::Error),
}

pub type Result<T> = std::result::Result<T, DemoError>;

/// The three demo tasks at their standard sizes.
pub fn task(name: &str) -> Result<TaskPath> {
    Ok(match name {
        "circle" => TaskPath::circle(0.40)?,
        "ellipse" => TaskPath::ellipse(0.40, 0.25)?,
        "rect" | "rectangle" => TaskPath::rectangle(0.70, 0.40)?,
        other => return Err(DemoError::UnknownTask(other.into())),
    })
}

/// Arm on the circle locus at angle `phi_deg`:
/// `[L1, L2, elbow_x, elbow_y, tip_x, tip_y, w_norm]`.
pub fn locus_arm(phi_deg: f64, radius: f64) -> Result<[f64; 7]> {
    let p = PhiParam::saturating(phi_deg.to_radians());
    let (l1, l2) = phi_to_lengths(p, radius);
    let m = Morphology::from_lengths(l1, l2)?;
    // elbow-up pose that puts the tip on the positive x axis at distance R
    let theta2 = std::f64::consts::FRAC_PI_2;
    let theta1 = -(l2 * theta2.sin()).atan2(l1 + l2 * theta2.cos());
    let tip = forward_kinematics(&m, JointConfig::new(theta1, theta2));
    let elbow = (l1 * theta1.cos(), l1 * theta1.sin());
    Ok([l1, l2, elbow.0, elbow.1, tip.x, tip.y, w_norm_phi(p)])
}

/// Sampled task path as interleaved `x, y` pairs.
pub fn path_points(name: &str, samples: usize) -> Result<Vec<f64>> {
    let t = task(name)?.with_samples(samples.max(4));
    Ok(sample_path(&t).points.iter().flat_map(|p| [p.x, p.y]).collect())
}

/// Hybrid reward on an `n × n` grid over the link-length box, row-major with
/// `L1` along rows, followed by the grid minimum and maximum.
pub fn hybrid_landscape(name: &str, n: usize) -> Result<Vec<f64>> {
    if !(2..=400).contains(&n) {
        return Err(DemoError::Resolution(n));
    }
    let t = task(name)?.with_samples(180);
    let (path, band, w) = (sample_path(&t), band_for(&t), RewardWeights::default());
    let step = (L_MAX - L_MIN) / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n + 2);
    for i in 0..n {
        for j in 0..n {
            let m = Morphology::from_lengths(L_MIN + step * i as f64, L_MIN + step * j as f64)?;
            out.push(evaluate(&m, &path, band, &w).r_hyb);
        }
    }
    let lo = out.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.extend([lo, hi]);
    Ok(out)
}

/// Runs a derivative-free optimizer on `sin 2φ`:
/// `[best_phi_deg, best_f, eval_count, trace...]` with the best-so-far trace.
pub fn optimizer_trace(method: &str, seed: u64) -> Result<Vec<f64>> {
    let f = |x: f64| circle_analytic_reward(PhiParam::saturating(x));
    let space = SearchSpace1D::phi();
    let mut rng = RngStream::new(seed);
    let r = match method {
        "pso" => pso_optimize(&f, space, &PsoSettings::default(), &mut rng),
        "bo" => bo_optimize(&f, space, &BoSettings::default(), &mut rng)?,
        "cmaes" => cmaes_optimize(&f, space, &CmaesSettings::default(), &mut rng),
        other => return Err(DemoError::UnknownOptimizer(other.into())),
    };
    let mut out = vec![r.best_x.to_degrees(), r.best_f, r.eval_count as f64];
    out.extend(r.trace.iter().map(|e| e.best_f));
    Ok(out)
}

fn js(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = locusArm)]
pub fn locus_arm_js(phi_deg: f64, radius: f64) -> std::result::Result<Vec<f64>, JsError> {
    locus_arm(phi_deg, radius).map(|a| a.to_vec()).map_err(js)
}

#[wasm_bindgen(js_name = pathPoints)]
pub fn path_points_js(task: &str, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    path_points(task, samples).map_err(js)
}

#[wasm_bindgen(js_name = hybridLandscape)]
pub fn hybrid_landscape_js(task: &str, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    hybrid_landscape(task, n).map_err(js)
}

#[wasm_bindgen(js_name = optimizerTrace)]
pub fn optimizer_trace_js(method: &str, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    optimizer_trace(method, seed as u64).map_err(js)
}

#[wasm_bindgen(js_name = linkBounds)]
pub fn link_bounds() -> Vec<f64> {
    vec![L_MIN, L_MAX]
}
