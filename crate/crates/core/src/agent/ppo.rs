//! Clipped-surrogate actor-critic training.

use super::net::{round_f32, PolicyNet};
use super::reward::ThroughputBonus;
use super::{act_normalized, ActMode};
use crate::error::{Error, Result};
use crate::rng::substream;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    /// Decisions (environment steps) to train for.
    pub total_steps: usize,
    /// Episodes collected between two updates.
    pub update_episodes: usize,
    /// Initial learning rate; decays linearly to zero over `total_steps`.
    pub learning_rate: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub clip_ratio: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub minibatch: usize,
    pub epochs: usize,
    pub max_grad_norm: f64,
    pub adam_eps: f64,
    pub throughput_bonus: ThroughputBonus,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            total_steps: 30_000,
            update_episodes: 10,
            learning_rate: 1e-4,
            discount: 0.999,
            gae_lambda: 0.95,
            clip_ratio: 0.2,
            entropy_coef: 0.01,
            value_coef: 0.5,
            minibatch: 64,
            epochs: 4,
            max_grad_norm: 0.5,
            adam_eps: 1e-5,
            throughput_bonus: ThroughputBonus::Improved,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must lie in [0, 1]");
        }
        if !(self.learning_rate >= 0.0) || !(self.clip_ratio > 0.0) || !(self.max_grad_norm > 0.0) {
            return bad("learning rate, clip ratio and gradient norm limit must be positive");
        }
        if self.total_steps == 0 || self.update_episodes == 0 || self.minibatch == 0 || self.epochs == 0 {
            return bad("step, episode, minibatch and epoch counts must be positive");
        }
        Ok(())
    }

    /// Learning rate after `step` environment steps.
    pub fn learning_rate_at(&self, step: usize) -> f64 {
        (self.learning_rate * (1.0 - step as f64 / self.total_steps as f64)).max(0.0)
    }
}

/// One stored decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Normalized input the policy saw.
    pub input: Vec<f64>,
    pub rule: usize,
    pub flip: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// A training row: transition plus its advantage and return target.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub rule: usize,
    pub flip: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossCoefs {
    pub clip_ratio: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl From<&TrainerConfig> for LossCoefs {
    fn from(c: &TrainerConfig) -> Self {
        Self {
            clip_ratio: c.clip_ratio,
            value_coef: c.value_coef,
            entropy_coef: c.entropy_coef,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

fn entropy_and_grad(logp: &[f64], scale: f64, dz: &mut [f64]) -> f64 {
    let h: f64 = -logp.iter().map(|l| l.exp() * l).sum::<f64>();
    // dH/dz_k = -p_k (log p_k + H)
    for (d, &l) in dz.iter_mut().zip(logp) {
        *d += scale * (-(l.exp()) * (l + h));
    }
    h
}

/// Mean loss over `batch`: `-clip surrogate + c_v * mse - c_e * entropy`,
/// with gradients accumulated into `grad` when given.
pub fn ppo_loss(net: &PolicyNet, batch: &[Sample], coefs: &LossCoefs, mut grad: Option<&mut [f64]>) -> LossParts {
    let n = batch.len().max(1) as f64;
    let r = net.shape.rules;
    let mut parts = LossParts::default();
    for s in batch {
        let f = net.forward(&s.input);
        let (l1, l2) = net.log_probs(&f);
        let logp = l1[s.rule] + l2[s.flip];
        let ratio = (logp - s.old_log_prob).exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(1.0 - coefs.clip_ratio, 1.0 + coefs.clip_ratio) * s.advantage;
        let surrogate = unclipped.min(clipped);
        let value_err = f.value - s.ret;
        parts.policy -= surrogate / n;
        parts.value += value_err * value_err / n;

        let mut dz = vec![0.0; f.logits.len()];
        // entropy bonus enters the loss with a negative sign
        let h1 = entropy_and_grad(&l1, -coefs.entropy_coef / n, &mut dz[..r]);
        let h2 = entropy_and_grad(&l2, -coefs.entropy_coef / n, &mut dz[r..]);
        parts.entropy += (h1 + h2) / n;

        if let Some(g) = grad.as_deref_mut() {
            // gradient flows only through the unclipped branch when it is the minimum
            if unclipped <= clipped {
                let dlogp = -ratio * s.advantage / n;
                for (k, d) in dz[..r].iter_mut().enumerate() {
                    *d += dlogp * ((k == s.rule) as u8 as f64 - l1[k].exp());
                }
                for (k, d) in dz[r..].iter_mut().enumerate() {
                    *d += dlogp * ((k == s.flip) as u8 as f64 - l2[k].exp());
                }
            }
            let dv = coefs.value_coef * 2.0 * value_err / n;
            net.backward(&f, &dz, dv, g);
        }
    }
    parts.total = parts.policy + coefs.value_coef * parts.value - coefs.entropy_coef * parts.entropy;
    parts
}

/// Generalized advantage estimates and return targets for one episode.
pub fn gae(rewards: &[f64], values: &[f64], discount: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { 0.0 };
        let delta = rewards[t] + discount * next_value - values[t];
        next_adv = delta + discount * lambda * next_adv;
        adv[t] = next_adv;
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    eps: f64,
}

impl Adam {
    fn new(n: usize, eps: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            eps,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

/// Something that produces episodes. `agent` is called with the raw
/// features at every decision and returns (rule index, flip index); the
/// result holds one reward per call, the final reward included in the last.
pub trait Environment {
    fn run_episode(
        &mut self,
        episode: u64,
        agent: &mut dyn FnMut(&[f64]) -> Result<(usize, usize)>,
    ) -> Result<Vec<f64>>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateLog {
    pub update: usize,
    pub steps: usize,
    pub episodes: usize,
    pub learning_rate: f64,
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mean_episode_reward: f64,
}

/// Trains `net` in place on episodes from `env` until `total_steps`
/// decisions were collected. Feature statistics are updated from every
/// observation before it is used.
pub fn ppo_train(env: &mut dyn Environment, net: &mut PolicyNet, cfg: &TrainerConfig, seed: u64) -> Result<Vec<UpdateLog>> {
    cfg.validate()?;
    let coefs = LossCoefs::from(cfg);
    let mut adam = Adam::new(net.params.len(), cfg.adam_eps);
    let mut log = Vec::new();
    let mut steps = 0;
    let mut episode = 0u64;
    let mut update = 0;
    while steps < cfg.total_steps {
        let mut samples = Vec::new();
        let mut returns = Vec::new();
        let mut episodes = 0;
        while episodes < cfg.update_episodes && steps < cfg.total_steps {
            let mut rng = substream(seed, &[0x990, episode]);
            let mut trace: Vec<Transition> = Vec::new();
            let rewards = {
                let net_ref = &mut *net;
                let mut agent = |features: &[f64]| -> Result<(usize, usize)> {
                    let _ = net_ref.prepare(features)?;
                    net_ref.norm.update(features);
                    let input = net_ref.norm.normalize(features);
                    let a = act_normalized(net_ref, &input, ActMode::Sample, &mut rng);
                    trace.push(Transition {
                        input,
                        rule: a.rule,
                        flip: a.flip,
                        log_prob: a.log_prob,
                        value: a.value,
                        reward: 0.0,
                        done: false,
                    });
                    Ok((a.rule, a.flip))
                };
                env.run_episode(episode, &mut agent)?
            };
            episode += 1;
            if rewards.len() != trace.len() {
                return Err(Error::Config(format!(
                    "environment returned {} rewards for {} decisions",
                    rewards.len(),
                    trace.len()
                )));
            }
            if trace.is_empty() {
                // an episode without decisions cannot advance training
                if episode > 1000 && steps == 0 {
                    return Err(Error::Config("environment produces no decisions".into()));
                }
                continue;
            }
            episodes += 1;
            steps += trace.len();
            returns.push(rewards.iter().sum::<f64>());
            let values: Vec<f64> = trace.iter().map(|t| t.value).collect();
            let (adv, ret) = gae(&rewards, &values, cfg.discount, cfg.gae_lambda);
            for (i, t) in trace.into_iter().enumerate() {
                samples.push(Sample {
                    input: t.input,
                    rule: t.rule,
                    flip: t.flip,
                    old_log_prob: t.log_prob,
                    advantage: adv[i],
                    ret: ret[i],
                });
            }
        }
        if samples.is_empty() {
            break;
        }
        let lr = cfg.learning_rate_at(steps);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut shuffle = substream(seed, &[0x991, update as u64]);
        let mut acc = LossParts::default();
        let mut batches = 0;
        for _ in 0..cfg.epochs {
            order.shuffle(&mut shuffle);
            for chunk in order.chunks(cfg.minibatch) {
                let mut batch: Vec<Sample> = chunk.iter().map(|&i| samples[i].clone()).collect();
                if batch.len() > 1 {
                    let m = batch.iter().map(|s| s.advantage).sum::<f64>() / batch.len() as f64;
                    let var = batch.iter().map(|s| (s.advantage - m).powi(2)).sum::<f64>() / batch.len() as f64;
                    let sd = var.sqrt() + 1e-8;
                    for s in &mut batch {
                        s.advantage = (s.advantage - m) / sd;
                    }
                }
                let mut grad = vec![0.0; net.params.len()];
                let parts = ppo_loss(net, &batch, &coefs, Some(&mut grad));
                let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if !parts.total.is_finite() || !gnorm.is_finite() {
                    return Err(Error::Divergence { update });
                }
                if gnorm > cfg.max_grad_norm {
                    let k = cfg.max_grad_norm / gnorm;
                    grad.iter_mut().for_each(|g| *g *= k);
                }
                adam.step(&mut net.params, &grad, lr);
                round_f32(&mut net.params);
                acc.total += parts.total;
                acc.policy += parts.policy;
                acc.value += parts.value;
                acc.entropy += parts.entropy;
                batches += 1;
            }
        }
        let b = batches.max(1) as f64;
        log.push(UpdateLog {
            update,
            steps,
            episodes,
            learning_rate: lr,
            loss: acc.total / b,
            policy_loss: acc.policy / b,
            value_loss: acc.value / b,
            entropy: acc.entropy / b,
            mean_episode_reward: returns.iter().sum::<f64>() / returns.len() as f64,
        });
        update += 1;
    }
    Ok(log)
}
