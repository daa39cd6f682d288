//! SAC, DDPG and PPO on single-step episodes.
//!
//! Each episode picks a morphology for a fixed task context, receives one
//! reward and terminates. Critic targets are therefore the observed reward;
//! the discount factor is carried in the settings but never multiplies
//! anything.

mod buffer;
mod ddpg;
mod env;
mod ppo;
mod sac;

pub use buffer::{ReplayBuffer, Transition};
pub use ddpg::{train_ddpg, Ddpg, DdpgSettings};
pub use env::{map_action, ActionSpec, BanditEnv, Context, MappedAction, Objective, L_MAX, L_MIN};
pub use ppo::{train_ppo, Ppo, PpoSettings, Rollout};
pub use sac::{train_sac, Sac, SacSettings};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sac,
    Ddpg,
    Ppo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sac, Algorithm::Ddpg, Algorithm::Ppo];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Sac => "SAC",
            Algorithm::Ddpg => "DDPG",
            Algorithm::Ppo => "PPO",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Algorithm::Sac => "sac",
            Algorithm::Ddpg => "ddpg",
            Algorithm::Ppo => "ppo",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sac" => Ok(Algorithm::Sac),
            "ddpg" => Ok(Algorithm::Ddpg),
            "ppo" => Ok(Algorithm::Ppo),
            other => Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Hyperparameters for all three agents.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RlSettings {
    pub sac: SacSettings,
    pub ddpg: DdpgSettings,
    pub ppo: PpoSettings,
}

impl RlSettings {
    pub fn with_episodes(mut self, episodes: usize) -> Self {
        self.sac.episodes = episodes;
        self.ddpg.episodes = episodes;
        self.ppo.episodes = episodes;
        self
    }
}

/// Losses of one gradient step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpdateStats {
    pub episode: usize,
    pub critic_loss: f64,
    pub actor_loss: f64,
    /// Norm of the last actor gradient applied.
    pub actor_grad_norm: f64,
    /// Pre-squash Gaussian entropy of the policy; absent for DDPG.
    pub entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainRecord {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Executed actions in `(−1, 1)^d`, one per episode.
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub best_episode: usize,
    pub best_action: Vec<f64>,
    pub best_reward: f64,
    pub greedy_action: Vec<f64>,
    pub greedy_reward: f64,
    pub updates: Vec<UpdateStats>,
}

impl TrainRecord {
    pub fn episodes(&self) -> usize {
        self.rewards.len()
    }

    /// Mean reward over the last `n` episodes.
    pub fn tail_mean(&self, n: usize) -> f64 {
        let k = n.min(self.rewards.len()).max(1);
        self.rewards[self.rewards.len() - k..].iter().sum::<f64>() / k as f64
    }

    pub fn head_mean(&self, n: usize) -> f64 {
        let k = n.min(self.rewards.len()).max(1);
        self.rewards[..k].iter().sum::<f64>() / k as f64
    }

    pub fn best(&self, env: &BanditEnv) -> MappedAction {
        env.map(&self.best_action)
    }

    pub fn greedy(&self, env: &BanditEnv) -> MappedAction {
        env.map(&self.greedy_action)
    }
}

pub fn train(algo: Algorithm, env: &BanditEnv, cfg: &RlSettings, seed: u64) -> Result<TrainRecord> {
    match algo {
        Algorithm::Sac => train_sac(env, &cfg.sac, seed),
        Algorithm::Ddpg => train_ddpg(env, &cfg.ddpg, seed),
        Algorithm::Ppo => train_ppo(env, &cfg.ppo, seed),
    }
}

/// Episode log shared by the three training loops.
struct Recorder {
    actions: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    best: Option<(usize, Vec<f64>, f64)>,
    updates: Vec<UpdateStats>,
}

impl Recorder {
    fn new(episodes: usize) -> Self {
        Self {
            actions: Vec::with_capacity(episodes),
            rewards: Vec::with_capacity(episodes),
            best: None,
            updates: Vec::new(),
        }
    }

    fn push(&mut self, action: Vec<f64>, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::NonFinite(format!("reward at episode {}", self.rewards.len())));
        }
        let ep = self.rewards.len();
        if self.best.as_ref().is_none_or(|b| reward > b.2) {
            self.best = Some((ep, action.clone(), reward));
        }
        self.actions.push(action);
        self.rewards.push(reward);
        Ok(())
    }

    fn update(&mut self, stats: UpdateStats, algo: Algorithm) -> Result<()> {
        let ok = stats.critic_loss.is_finite() && stats.actor_loss.is_finite() && stats.entropy.is_none_or(f64::is_finite);
        if !ok {
            return Err(Error::NonFinite(format!("{} update at episode {}: {stats:?}", algo.label(), stats.episode)));
        }
        self.updates.push(stats);
        Ok(())
    }

    fn finish(self, algo: Algorithm, seed: u64, env: &BanditEnv, greedy: Vec<f64>) -> Result<TrainRecord> {
        let (best_episode, best_action, best_reward) =
            self.best.ok_or_else(|| Error::InvalidParameter("training needs at least one episode".into()))?;
        let greedy_reward = env.reward(&greedy);
        Ok(TrainRecord {
            algorithm: algo,
            seed,
            actions: self.actions,
            rewards: self.rewards,
            best_episode,
            best_action,
            best_reward,
            greedy_action: greedy,
            greedy_reward,
            updates: self.updates,
        })
    }
}

/// `batch × (ctx ‖ action)` critic input.
fn critic_input(ctx: &[f64], actions: &[&[f64]]) -> Array2<f64> {
    let width = ctx.len() + actions.first().map_or(0, |a| a.len());
    let mut x = Array2::zeros((actions.len(), width));
    for (i, a) in actions.iter().enumerate() {
        for (j, v) in ctx.iter().chain(a.iter()).enumerate() {
            x[[i, j]] = *v;
        }
    }
    x
}

fn ctx_batch(ctx: &[f64], rows: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, ctx.len()), |(_, j)| ctx[j])
}

fn column(values: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((values.len(), 1), values.to_vec()).expect("column shape")
}

/// Mean squared error of a `B × 1` prediction and its output gradient.
fn mse(pred: &Array2<f64>, target: &[f64]) -> (f64, Array2<f64>) {
    let b = target.len() as f64;
    let diff = Array2::from_shape_fn((target.len(), 1), |(i, _)| pred[[i, 0]] - target[i]);
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / b;
    (loss, diff * (2.0 / b))
}
