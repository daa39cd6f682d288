use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{column, critic_input, ctx_batch, mse, Algorithm, BanditEnv, Recorder, ReplayBuffer, TrainRecord, Transition, UpdateStats};
use crate::error::Result;
use crate::nn::{split_head, Adam, Layers, Mlp, HIDDEN, SQUASH_EPS};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SacSettings {
    pub episodes: usize,
    pub batch: usize,
    /// Episodes collected before the first gradient step.
    pub warmup: usize,
    pub lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub buffer: usize,
}

impl Default for SacSettings {
    fn default() -> Self {
        Self { episodes: 5000, batch: 256, warmup: 256, lr: 3e-4, gamma: 0.99, tau: 0.005, alpha: 0.2, buffer: 100_000 }
    }
}

/// Squashed-Gaussian actor, twin critics with Polyak targets, fixed α.
#[derive(Debug, Clone)]
pub struct Sac {
    pub cfg: SacSettings,
    dim: usize,
    pub actor: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
    actor_opt: Adam,
    q1_opt: Adam,
    q2_opt: Adam,
}

impl Sac {
    pub fn new(ctx_dim: usize, action_dim: usize, cfg: SacSettings, rng: &mut RngStream) -> Result<Self> {
        let actor = Mlp::new(&[ctx_dim, HIDDEN, HIDDEN, 2 * action_dim], 1e-2, rng)?;
        let q1 = Mlp::new(&[ctx_dim + action_dim, HIDDEN, HIDDEN, 1], 1.0, rng)?;
        let q2 = Mlp::new(&[ctx_dim + action_dim, HIDDEN, HIDDEN, 1], 1.0, rng)?;
        Ok(Self {
            cfg,
            dim: action_dim,
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            actor,
            q1,
            q2,
            actor_opt: Adam::new(cfg.lr),
            q1_opt: Adam::new(cfg.lr),
            q2_opt: Adam::new(cfg.lr),
        })
    }

    fn head(&self, ctx: &[f64]) -> Result<crate::nn::SquashedGaussian> {
        let out = self.actor.predict(&ctx_batch(ctx, 1))?;
        Ok(split_head(out.row(0), self.dim))
    }

    pub fn act(&self, ctx: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        Ok(self.head(ctx)?.sample(rng).action)
    }

    /// `tanh(μ)`.
    pub fn greedy(&self, ctx: &[f64]) -> Result<Vec<f64>> {
        Ok(self.head(ctx)?.mode())
    }

    pub fn entropy(&self, ctx: &[f64]) -> Result<f64> {
        Ok(self.head(ctx)?.gaussian_entropy())
    }

    /// `mean(α log π(a) − min(Q1, Q2)(a))` over reparameterized draws with
    /// the given noise, its gradient on the actor, and the mean Gaussian entropy.
    pub fn actor_objective(&self, ctx: &[f64], eps: &[Vec<f64>]) -> Result<(f64, f64, Layers)> {
        let b = eps.len();
        let d = self.dim;
        let (out, atape) = self.actor.forward(&ctx_batch(ctx, b))?;
        let heads: Vec<_> = (0..b).map(|i| split_head(out.row(i), d)).collect();
        let samples: Vec<_> = heads.iter().zip(eps).map(|(h, e)| h.sample_with(e.clone())).collect();
        let acts: Vec<&[f64]> = samples.iter().map(|s| s.action.as_slice()).collect();
        let xa = critic_input(ctx, &acts);
        let (qa1, t1) = self.q1.forward(&xa)?;
        let (qa2, t2) = self.q2.forward(&xa)?;
        let pick1: Vec<f64> = (0..b).map(|i| if qa1[[i, 0]] <= qa2[[i, 0]] { 1.0 } else { 0.0 }).collect();
        let (_, gx1) = self.q1.backward(&t1, &column(&pick1))?;
        let pick2: Vec<f64> = pick1.iter().map(|p| 1.0 - p).collect();
        let (_, gx2) = self.q2.backward(&t2, &column(&pick2))?;

        let alpha = self.cfg.alpha;
        let cd = ctx.len();
        let n = b as f64;
        let mut g_out = Array2::zeros((b, 2 * d));
        let mut loss = 0.0;
        let mut entropy = 0.0;
        for i in 0..b {
            let (h, s) = (&heads[i], &samples[i]);
            loss += alpha * s.log_prob - qa1[[i, 0]].min(qa2[[i, 0]]);
            entropy += h.gaussian_entropy();
            for j in 0..d {
                let a = s.action[j];
                let sech2 = 1.0 - a * a;
                // d log π / du through the tanh correction
                let g = 2.0 * a * sech2 / (sech2 + SQUASH_EPS);
                let qa = gx1[[i, cd + j]] + gx2[[i, cd + j]];
                let sigma_eps = h.log_std[j].exp() * s.eps[j];
                g_out[[i, j]] = (alpha * g - qa * sech2) / n;
                if !h.clamped[j] {
                    g_out[[i, d + j]] = (alpha * (-1.0 + g * sigma_eps) - qa * sech2 * sigma_eps) / n;
                }
            }
        }
        let (grads, _) = self.actor.backward(&atape, &g_out)?;
        Ok((loss / n, entropy / n, grads))
    }

    pub fn update(&mut self, batch: &[&Transition], rng: &mut RngStream, episode: usize) -> Result<UpdateStats> {
        let b = batch.len();
        let d = self.dim;
        let ctx = &batch[0].context;
        // every episode is terminal, so the target is the reward alone
        let y: Vec<f64> = batch.iter().map(|t| t.reward).collect();

        // critics
        let actions: Vec<&[f64]> = batch.iter().map(|t| t.action.as_slice()).collect();
        let x = critic_input(ctx, &actions);
        let (p1, tape1) = self.q1.forward(&x)?;
        let (l1, g1) = mse(&p1, &y);
        let (grads, _) = self.q1.backward(&tape1, &g1)?;
        self.q1_opt.step(&mut self.q1, &grads)?;
        let (p2, tape2) = self.q2.forward(&x)?;
        let (l2, g2) = mse(&p2, &y);
        let (grads, _) = self.q2.backward(&tape2, &g2)?;
        self.q2_opt.step(&mut self.q2, &grads)?;

        let eps: Vec<Vec<f64>> = (0..b).map(|_| (0..d).map(|_| rng.normal()).collect()).collect();
        let (actor_loss, entropy, grads) = self.actor_objective(ctx, &eps)?;
        let actor_grad_norm = grads.norm();
        self.actor_opt.step(&mut self.actor, &grads)?;

        self.q1_target.soft_update(&self.q1, self.cfg.tau)?;
        self.q2_target.soft_update(&self.q2, self.cfg.tau)?;

        Ok(UpdateStats {
            episode,
            critic_loss: 0.5 * (l1 + l2),
            actor_loss,
            actor_grad_norm,
            entropy: Some(entropy),
        })
    }
}

pub fn train_sac(env: &BanditEnv, cfg: &SacSettings, seed: u64) -> Result<TrainRecord> {
    let mut rng = RngStream::new(seed);
    let ctx = env.context.0.to_vec();
    let mut agent = Sac::new(ctx.len(), env.action_dim(), *cfg, &mut rng)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer);
    let mut rec = Recorder::new(cfg.episodes);
    for ep in 0..cfg.episodes {
        let a = agent.act(&ctx, &mut rng)?;
        let r = env.reward(&a);
        buffer.push(Transition { context: ctx.clone(), action: a.clone(), reward: r });
        rec.push(a, r)?;
        if ep >= cfg.warmup && !buffer.is_empty() {
            let batch = buffer.sample(cfg.batch, &mut rng);
            let stats = agent.update(&batch, &mut rng, ep)?;
            rec.update(stats, Algorithm::Sac)?;
        }
    }
    let greedy = agent.greedy(&ctx)?;
    rec.finish(Algorithm::Sac, seed, env, greedy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward::RewardWeights;
    use crate::taskpath::TaskPath;

    #[test]
    fn actor_gradient_matches_finite_differences() {
        for (d, seed) in [(1usize, 3u64), (3, 4)] {
            let mut rng = RngStream::new(seed);
            let mut agent = Sac::new(5, d, SacSettings::default(), &mut rng).unwrap();
            // move the policy off its near-zero init so every term matters
            let mut p = agent.actor.params().flatten();
            p.iter_mut().for_each(|v| *v += 0.3 * rng.normal());
            agent.actor.params_mut().set_flat(&p).unwrap();
            let ctx = [0.0, 1.0, 0.0, 0.4, 0.25];
            let eps: Vec<Vec<f64>> = (0..16).map(|_| (0..d).map(|_| rng.normal()).collect()).collect();
            let (_, _, g) = agent.actor_objective(&ctx, &eps).unwrap();
            let g = g.flatten();
            let h = 1e-5;
            for _ in 0..100 {
                let i = rng.index(p.len());
                let mut probe = agent.clone();
                let mut q = p.clone();
                q[i] += h;
                probe.actor.params_mut().set_flat(&q).unwrap();
                let up = probe.actor_objective(&ctx, &eps).unwrap().0;
                q[i] -= 2.0 * h;
                probe.actor.params_mut().set_flat(&q).unwrap();
                let down = probe.actor_objective(&ctx, &eps).unwrap().0;
                let fd = (up - down) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6f64.max(1e-4 * g[i].abs()), "d={d} param {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn target_networks_do_not_affect_updates() {
        let env = BanditEnv::for_task(TaskPath::circle(0.4).unwrap(), RewardWeights::default()).unwrap();
        let cfg = SacSettings { batch: 32, ..Default::default() };
        let mut rng = RngStream::new(9);
        let mut a = Sac::new(5, 1, cfg, &mut rng).unwrap();
        let mut b = a.clone();
        let junk = Mlp::new(&[6, HIDDEN, HIDDEN, 1], 1e3, &mut rng).unwrap();
        b.q1_target = junk.clone();
        b.q2_target = junk;
        let ctx = env.context.0.to_vec();
        let mut buf = ReplayBuffer::new(100);
        for _ in 0..64 {
            let act = a.act(&ctx, &mut rng).unwrap();
            buf.push(Transition { context: ctx.clone(), action: act.clone(), reward: env.reward(&act) });
        }
        let (mut ra, mut rb) = (RngStream::new(1), RngStream::new(1));
        for ep in 0..20 {
            let batch = buf.sample(32, &mut ra);
            let sa = a.update(&batch, &mut ra, ep).unwrap();
            let batch = buf.sample(32, &mut rb);
            let sb = b.update(&batch, &mut rb, ep).unwrap();
            assert_eq!(sa, sb);
        }
        assert_eq!(a.actor, b.actor);
        assert_eq!(a.q1, b.q1);
    }
}
