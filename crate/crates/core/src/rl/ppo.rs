use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::{ctx_batch, mse, Algorithm, BanditEnv, Recorder, TrainRecord, UpdateStats};
use crate::error::Result;
use crate::nn::{gaussian_log_prob, split_head, Adam, Mlp, SquashedGaussian, HIDDEN};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoSettings {
    pub episodes: usize,
    /// Episodes collected per policy iteration.
    pub batch: usize,
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
    pub gamma: f64,
    pub clip: f64,
}

impl Default for PpoSettings {
    fn default() -> Self {
        Self { episodes: 5000, batch: 128, epochs: 10, minibatch: 32, lr: 3e-4, gamma: 0.99, clip: 0.2 }
    }
}

/// One collected episode: pre-squash draw, its old log-density, reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub u: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
}

/// Clipped-surrogate policy with a learned value baseline. The policy mean
/// comes from the network; the log-std is a free per-dimension parameter.
#[derive(Debug, Clone)]
pub struct Ppo {
    pub cfg: PpoSettings,
    pub actor: Mlp,
    pub log_std: Vec<f64>,
    pub value: Mlp,
    actor_opt: Adam,
    log_std_opt: Adam,
    value_opt: Adam,
}

impl Ppo {
    pub fn new(ctx_dim: usize, action_dim: usize, cfg: PpoSettings, rng: &mut RngStream) -> Result<Self> {
        let actor = Mlp::new(&[ctx_dim, HIDDEN, HIDDEN, action_dim], 1e-2, rng)?;
        let value = Mlp::new(&[ctx_dim, HIDDEN, HIDDEN, 1], 1.0, rng)?;
        Ok(Self {
            cfg,
            actor,
            log_std: vec![0.0; action_dim],
            value,
            actor_opt: Adam::new(cfg.lr),
            log_std_opt: Adam::new(cfg.lr),
            value_opt: Adam::new(cfg.lr),
        })
    }

    fn head_from(&self, mean: ArrayView1<f64>) -> SquashedGaussian {
        let joined: Vec<f64> = mean.iter().chain(&self.log_std).copied().collect();
        split_head(ArrayView1::from(&joined), self.log_std.len())
    }

    pub fn head(&self, ctx: &[f64]) -> Result<SquashedGaussian> {
        Ok(self.head_from(self.actor.predict(&ctx_batch(ctx, 1))?.row(0)))
    }

    pub fn greedy(&self, ctx: &[f64]) -> Result<Vec<f64>> {
        Ok(self.head(ctx)?.mode())
    }

    pub fn baseline(&self, ctx: &[f64]) -> Result<f64> {
        Ok(self.value.predict(&ctx_batch(ctx, 1))?[[0, 0]])
    }

    /// Standardized `r − V(ctx)`; exactly zero when all rewards agree.
    pub fn advantages(&self, ctx: &[f64], rollouts: &[Rollout]) -> Result<Vec<f64>> {
        let v = self.baseline(ctx)?;
        let raw: Vec<f64> = rollouts.iter().map(|r| r.reward - v).collect();
        let n = raw.len() as f64;
        let mean = raw.iter().sum::<f64>() / n;
        let sd = (raw.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd <= 1e-12 * (1.0 + mean.abs()) {
            // spread at rounding level: nothing to prefer
            return Ok(vec![0.0; raw.len()]);
        }
        Ok(raw.iter().map(|a| (a - mean) / (sd + 1e-8)).collect())
    }

    /// Probability ratios `π_new(u) / π_old(u)` of a batch under the current policy.
    pub fn ratios(&self, ctx: &[f64], rollouts: &[Rollout]) -> Result<Vec<f64>> {
        let h = self.head(ctx)?;
        Ok(rollouts.iter().map(|r| (h.log_prob(&r.u) - r.log_prob).exp()).collect())
    }

    /// Several epochs of clipped-surrogate and value regression over one batch.
    pub fn update(&mut self, ctx: &[f64], rollouts: &[Rollout], rng: &mut RngStream, episode: usize) -> Result<UpdateStats> {
        let adv = self.advantages(ctx, rollouts)?;
        let d = self.log_std.len();
        let (lo, hi) = (1.0 - self.cfg.clip, 1.0 + self.cfg.clip);
        let mut order: Vec<usize> = (0..rollouts.len()).collect();
        let (mut actor_loss, mut value_loss, mut entropy, mut actor_grad_norm) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..self.cfg.epochs {
            rng.shuffle(&mut order);
            for mb in order.chunks(self.cfg.minibatch.max(1)) {
                let m = mb.len();
                let states = ctx_batch(ctx, m);
                let (out, tape) = self.actor.forward(&states)?;
                let mut g_out = Array2::zeros((m, d));
                let mut g_log_std = vec![0.0; d];
                actor_loss = 0.0;
                for (row, &k) in mb.iter().enumerate() {
                    let h = self.head_from(out.row(row));
                    let ro = &rollouts[k];
                    // the tanh correction depends on u only and cancels in the ratio
                    let lp_new = gaussian_log_prob(&ro.u, &h.mean, &h.log_std) - crate::nn::squash_correction(&ro.u);
                    let ratio = (lp_new - ro.log_prob).exp();
                    let a = adv[k];
                    let clipped = ratio.clamp(lo, hi);
                    actor_loss -= (ratio * a).min(clipped * a) / m as f64;
                    entropy = h.gaussian_entropy();
                    let active = ratio * a <= clipped * a;
                    if !active {
                        continue;
                    }
                    let dl = -ratio * a / m as f64;
                    for j in 0..d {
                        let inv_var = (-2.0 * h.log_std[j]).exp();
                        let z = ro.u[j] - h.mean[j];
                        g_out[[row, j]] = dl * z * inv_var;
                        if !h.clamped[j] {
                            g_log_std[j] += dl * (z * z * inv_var - 1.0);
                        }
                    }
                }
                let (grads, _) = self.actor.backward(&tape, &g_out)?;
                actor_grad_norm = (grads.norm().powi(2) + g_log_std.iter().map(|g| g * g).sum::<f64>()).sqrt();
                self.actor_opt.step(&mut self.actor, &grads)?;
                self.log_std_opt.step_slice(&mut self.log_std, &g_log_std)?;

                let targets: Vec<f64> = mb.iter().map(|&k| rollouts[k].reward).collect();
                let (pred, vtape) = self.value.forward(&states)?;
                let (loss, g) = mse(&pred, &targets);
                value_loss = loss;
                let (grads, _) = self.value.backward(&vtape, &g)?;
                self.value_opt.step(&mut self.value, &grads)?;
            }
        }
        Ok(UpdateStats { episode, critic_loss: value_loss, actor_loss, actor_grad_norm, entropy: Some(entropy) })
    }
}

pub fn train_ppo(env: &BanditEnv, cfg: &PpoSettings, seed: u64) -> Result<TrainRecord> {
    let mut rng = RngStream::new(seed);
    let ctx = env.context.0.to_vec();
    let mut agent = Ppo::new(ctx.len(), env.action_dim(), *cfg, &mut rng)?;
    let mut rec = Recorder::new(cfg.episodes);
    let per_iter = cfg.batch.max(1);
    let mut done = 0;
    while done < cfg.episodes {
        let n = per_iter.min(cfg.episodes - done);
        let head = agent.head(&ctx)?;
        let mut rollouts = Vec::with_capacity(n);
        for _ in 0..n {
            let s = head.sample(&mut rng);
            let r = env.reward(&s.action);
            rec.push(s.action, r)?;
            rollouts.push(Rollout { u: s.u, log_prob: s.log_prob, reward: r });
        }
        done += n;
        let stats = agent.update(&ctx, &rollouts, &mut rng, done - 1)?;
        rec.update(stats, Algorithm::Ppo)?;
    }
    let greedy = agent.greedy(&ctx)?;
    rec.finish(Algorithm::Ppo, seed, env, greedy)
}
