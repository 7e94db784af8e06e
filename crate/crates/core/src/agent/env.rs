//! Environments for training: the simulator on a fixed genome, and a small
//! synthetic task with a known best rule.

use super::net::{NetShape, PolicyNet};
use super::ppo::{ppo_train, Environment, TrainerConfig, UpdateLog};
use super::reward::{final_reward, intermediate_reward, ThroughputBonus};
use super::{FLIPS, RULES};
use crate::error::{Error, Result};
use crate::genome::Genome;
use crate::instance::{scalarize, Baseline, ProblemInstance};
use crate::rng::substream;
use crate::search::{run_gasa, SearchConfig};
use crate::sim::{simulate_with, Decision, DecisionMaker, DecisionView, SimOptions};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Training sample produced by a short memetic run: the genome episodes
/// replay and the objective value the agent has to beat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub genome: Genome,
    pub fit_label: f64,
    pub baseline: Baseline,
}

/// Runs GASA for `generations` generations and keeps its best genome.
pub fn warmup_fit_label(
    instance: &ProblemInstance,
    config: &SearchConfig,
    generations: usize,
    seed: u64,
) -> Result<WarmStart> {
    let budget = config.ga.population_size + generations.saturating_sub(1) * config.ga.offspring;
    let r = run_gasa(instance, config, budget, seed, 1)?;
    Ok(WarmStart {
        genome: r.best_genome,
        fit_label: r.best_z,
        baseline: r.baseline,
    })
}

pub struct SchedulingEnv<'a> {
    pub instance: &'a ProblemInstance,
    pub start: WarmStart,
    pub bonus: ThroughputBonus,
}

struct Relay<'f> {
    agent: &'f mut dyn FnMut(&[f64]) -> Result<(usize, usize)>,
}

impl DecisionMaker for Relay<'_> {
    fn decide(&mut self, view: &DecisionView<'_>) -> Result<Decision> {
        let (a, b) = (self.agent)(view.features.as_slice())?;
        match (RULES.get(a), FLIPS.get(b)) {
            (Some(&rule), Some(&flip)) => Ok(Decision { rule, flip }),
            _ => Err(Error::Config(format!("action ({a}, {b}) out of range"))),
        }
    }
}

impl Environment for SchedulingEnv<'_> {
    /// Simulates the warm-start genome with the agent deciding. Flips act on
    /// this episode only.
    fn run_episode(
        &mut self,
        _episode: u64,
        agent: &mut dyn FnMut(&[f64]) -> Result<(usize, usize)>,
    ) -> Result<Vec<f64>> {
        let mut relay = Relay { agent };
        let out = simulate_with(self.instance, &self.start.genome, Some(&mut relay), &SimOptions::default())?;
        let d = &out.decisions;
        let mut rewards: Vec<f64> = (0..d.len())
            .map(|t| {
                let last = &d[t].features;
                let current = d.get(t + 1).map_or(last, |n| &n.features);
                intermediate_reward(last, current, d[t].rule, d[t].requested_flip, self.bonus)
            })
            .collect();
        if let Some(r) = rewards.last_mut() {
            let achieved = scalarize(&out.metrics, &self.start.baseline, self.instance.weights)?;
            *r += final_reward(self.start.fit_label, achieved, d.len());
        }
        Ok(rewards)
    }
}

/// Episodes of `steps` decisions on uniform random features; choosing rule
/// index `best_rule` earns 1, anything else 0.
#[derive(Clone, Debug)]
pub struct ToyEnv {
    pub features: usize,
    pub steps: usize,
    pub best_rule: usize,
    pub seed: u64,
}

impl ToyEnv {
    pub fn state(&self, episode: u64, step: usize) -> Vec<f64> {
        let mut r = substream(self.seed, &[episode, step as u64]);
        (0..self.features).map(|_| r.gen::<f64>()).collect()
    }
}

impl Environment for ToyEnv {
    fn run_episode(
        &mut self,
        episode: u64,
        agent: &mut dyn FnMut(&[f64]) -> Result<(usize, usize)>,
    ) -> Result<Vec<f64>> {
        (0..self.steps)
            .map(|t| {
                let (a, _) = agent(&self.state(episode, t))?;
                Ok(if a == self.best_rule { 1.0 } else { 0.0 })
            })
            .collect()
    }
}

/// Outcome of `train_policy`.
#[derive(Clone, Debug)]
pub struct Training {
    pub net: PolicyNet,
    pub log: Vec<UpdateLog>,
    pub start: WarmStart,
}

/// Warm-up search, then PPO on the simulator replaying the warm-up's best
/// genome.
pub fn train_policy(
    instance: &ProblemInstance,
    search: &SearchConfig,
    trainer: &TrainerConfig,
    shape: NetShape,
    warmup_generations: usize,
    seed: u64,
) -> Result<Training> {
    trainer.validate()?;
    let start = warmup_fit_label(instance, search, warmup_generations, substream(seed, &[0x7A1]).gen())?;
    let mut net = PolicyNet::new(shape, substream(seed, &[0x7A2]).gen())?;
    let mut env = SchedulingEnv {
        instance,
        start: start.clone(),
        bonus: trainer.throughput_bonus,
    };
    let log = ppo_train(&mut env, &mut net, trainer, substream(seed, &[0x7A3]).gen())?;
    Ok(Training { net, log, start })
}
