//! Run metadata: the resolved configuration, its hash and the implicit defaults.

use std::path::Path;

use morphopt::kinematics::{PHI_EPS, REACH_TOL};
use morphopt::nn::{HIDDEN, LOG_STD_MAX, LOG_STD_MIN, SQUASH_EPS};
use morphopt::rl::{L_MAX, L_MIN};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::{Outputs, RunData, PROGRESS_WINDOW};

/// Choices the configuration file does not expose.
fn fixed_defaults() -> Value {
    json!({
        "phi_range_rad": [PHI_EPS, std::f64::consts::FRAC_PI_2 - PHI_EPS],
        "reach_tolerance_m": REACH_TOL,
        "link_length_box_m": [L_MIN, L_MAX],
        "rl_context": "task one-hot (3) followed by the two shape parameters",
        "circle_action": "phi = pi/4 + (pi/4 - eps) * u, u in [-1, 1]",
        "path_action": "L = 0.325 + 0.275 u for both links, theta2 = pi/2 (1 + u3)",
        "critic_target": "immediate reward (one-step episodes)",
        "hidden_layers": [HIDDEN, HIDDEN],
        "activation": "tanh hidden, linear output",
        "init": "uniform +-1/sqrt(fan_in); policy output layer scaled by 0.01",
        "adam": {"beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
        "log_std_clamp": [LOG_STD_MIN, LOG_STD_MAX],
        "tanh_jacobian_eps": SQUASH_EPS,
        "ppo_log_std": "state-independent parameter, initialised to 0",
        "ppo_advantage": "reward minus value, standardised per batch",
        "best_action": "highest-reward executed action over all episodes",
        "greedy_action": "deterministic policy output after training",
        "circle_summary_rl_row": "mean over seeds of the BEST action",
        "combined_and_annulus_rows": "GREEDY morphology per seed; R is its reward",
        "aggregate_std": "sample standard deviation (n - 1)",
        "progress_window_episodes": PROGRESS_WINDOW,
        "number_format": "fixed point, 6 decimals",
    })
}

pub fn render(cfg: &ExperimentConfig, command: &str, out: &Outputs, data: &RunData) -> Vec<u8> {
    let files: Vec<Value> =
        out.files.iter().map(|(name, bytes)| json!({"name": name, "sha256": Outputs::sha256(bytes)})).collect();
    let evals: serde_json::Map<String, Value> =
        data.heuristics.iter().map(|h| (h.heuristic.label().to_string(), json!(h.result.eval_count))).collect();
    let canonical = ExperimentConfig { out: Default::default(), ..cfg.clone() };
    let meta = json!({
        "command": command,
        "task": cfg.task.tag(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.hash(),
        "config_toml": cfg.canonical_toml(),
        "config": canonical,
        "rl_settings": cfg.rl_settings(),
        "fixed_defaults": fixed_defaults(),
        "eval_counts": evals,
        "files": files,
    });
    let mut bytes = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    bytes.push(b'\n');
    bytes
}

/// Loads the configuration recorded in a metadata file after checking its hash.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read { path: path.into(), source })?;
    let malformed = |msg: String| HarnessError::Malformed { path: path.into(), msg };
    let v: Value = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    let toml = v["config_toml"].as_str().ok_or_else(|| malformed("no config_toml".into()))?;
    let hash = v["config_hash"].as_str().ok_or_else(|| malformed("no config_hash".into()))?;
    let cfg = ExperimentConfig::from_toml(toml)?;
    if cfg.hash() != hash {
        return Err(HarnessError::Integrity(format!("config hash {hash} does not match the recorded configuration")));
    }
    Ok(cfg)
}
