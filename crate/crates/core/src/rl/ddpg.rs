use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{critic_input, ctx_batch, mse, Algorithm, BanditEnv, Recorder, ReplayBuffer, TrainRecord, Transition, UpdateStats};
use crate::error::Result;
use crate::nn::{Adam, Mlp, HIDDEN};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdpgSettings {
    pub episodes: usize,
    pub batch: usize,
    pub warmup: usize,
    pub lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub buffer: usize,
    /// Exploration std on the pre-squash output, decayed linearly.
    pub noise_start: f64,
    pub noise_end: f64,
}

impl Default for DdpgSettings {
    fn default() -> Self {
        Self {
            episodes: 5000,
            batch: 256,
            warmup: 256,
            lr: 1e-3,
            gamma: 0.99,
            tau: 0.005,
            buffer: 100_000,
            noise_start: 0.1,
            noise_end: 0.01,
        }
    }
}

impl DdpgSettings {
    pub fn noise_at(&self, episode: usize) -> f64 {
        let frac = if self.episodes > 1 { episode as f64 / (self.episodes - 1) as f64 } else { 0.0 };
        self.noise_start + (self.noise_end - self.noise_start) * frac.min(1.0)
    }
}

/// Deterministic tanh actor, single critic, Polyak targets.
#[derive(Debug, Clone)]
pub struct Ddpg {
    pub cfg: DdpgSettings,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
}

impl Ddpg {
    pub fn new(ctx_dim: usize, action_dim: usize, cfg: DdpgSettings, rng: &mut RngStream) -> Result<Self> {
        let actor = Mlp::new(&[ctx_dim, HIDDEN, HIDDEN, action_dim], 1e-2, rng)?;
        let critic = Mlp::new(&[ctx_dim + action_dim, HIDDEN, HIDDEN, 1], 1.0, rng)?;
        Ok(Self {
            cfg,
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            actor_opt: Adam::new(cfg.lr),
            critic_opt: Adam::new(cfg.lr),
        })
    }

    fn pre_squash(&self, ctx: &[f64]) -> Result<Vec<f64>> {
        Ok(self.actor.predict(&ctx_batch(ctx, 1))?.row(0).to_vec())
    }

    pub fn act(&self, ctx: &[f64], sigma: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
        Ok(self.pre_squash(ctx)?.into_iter().map(|y| (y + sigma * rng.normal()).tanh()).collect())
    }

    pub fn greedy(&self, ctx: &[f64]) -> Result<Vec<f64>> {
        Ok(self.pre_squash(ctx)?.into_iter().map(f64::tanh).collect())
    }

    pub fn update(&mut self, batch: &[&Transition], episode: usize) -> Result<UpdateStats> {
        let b = batch.len();
        let ctx = &batch[0].context;
        // terminal episodes: the target is the reward itself
        let y: Vec<f64> = batch.iter().map(|t| t.reward).collect();
        let actions: Vec<&[f64]> = batch.iter().map(|t| t.action.as_slice()).collect();
        let (pred, tape) = self.critic.forward(&critic_input(ctx, &actions))?;
        let (critic_loss, g) = mse(&pred, &y);
        let (grads, _) = self.critic.backward(&tape, &g)?;
        self.critic_opt.step(&mut self.critic, &grads)?;

        let (out, atape) = self.actor.forward(&ctx_batch(ctx, b))?;
        let acts: Vec<Vec<f64>> = out.rows().into_iter().map(|r| r.iter().map(|y| y.tanh()).collect()).collect();
        let refs: Vec<&[f64]> = acts.iter().map(Vec::as_slice).collect();
        let (q, qtape) = self.critic.forward(&critic_input(ctx, &refs))?;
        let (_, gx) = self.critic.backward(&qtape, &Array2::from_elem((b, 1), -1.0 / b as f64))?;
        let cd = ctx.len();
        let d = out.ncols();
        let g_out = Array2::from_shape_fn((b, d), |(i, j)| gx[[i, cd + j]] * (1.0 - acts[i][j] * acts[i][j]));
        let (grads, _) = self.actor.backward(&atape, &g_out)?;
        let actor_grad_norm = grads.norm();
        self.actor_opt.step(&mut self.actor, &grads)?;

        self.actor_target.soft_update(&self.actor, self.cfg.tau)?;
        self.critic_target.soft_update(&self.critic, self.cfg.tau)?;
        Ok(UpdateStats { episode, critic_loss, actor_loss: -q.mean().unwrap_or(0.0), actor_grad_norm, entropy: None })
    }
}

pub fn train_ddpg(env: &BanditEnv, cfg: &DdpgSettings, seed: u64) -> Result<TrainRecord> {
    let mut rng = RngStream::new(seed);
    let ctx = env.context.0.to_vec();
    let mut agent = Ddpg::new(ctx.len(), env.action_dim(), *cfg, &mut rng)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer);
    let mut rec = Recorder::new(cfg.episodes);
    for ep in 0..cfg.episodes {
        let a = agent.act(&ctx, cfg.noise_at(ep), &mut rng)?;
        let r = env.reward(&a);
        buffer.push(Transition { context: ctx.clone(), action: a.clone(), reward: r });
        rec.push(a, r)?;
        if ep >= cfg.warmup {
            let batch = buffer.sample(cfg.batch, &mut rng);
            let stats = agent.update(&batch, ep)?;
            rec.update(stats, Algorithm::Ddpg)?;
        }
    }
    let greedy = agent.greedy(&ctx)?;
    rec.finish(Algorithm::Ddpg, seed, env, greedy)
}
