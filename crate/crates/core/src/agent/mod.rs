//! Actor-critic agent that picks a dispatching rule and an assignment flip
//! at each decision point, its training loop and checkpoint format.

mod checkpoint;
mod env;
mod net;
mod ppo;
mod reward;


pub use checkpoint::{load_policy, read_policy, save_policy, write_policy, CHECKPOINT_VERSION};
pub use env::{train_policy, warmup_fit_label, SchedulingEnv, ToyEnv, Training, WarmStart};
pub use net::{log_softmax, Forward, NetShape, PolicyNet, RunningNorm};
pub use ppo::{gae, ppo_loss, ppo_train, Environment, LossCoefs, LossParts, Sample, TrainerConfig, Transition, UpdateLog};
pub use reward::{final_reward, intermediate_reward, ThroughputBonus};

use crate::error::Result;
use crate::genome::DispatchRule;
use crate::rng::{from_seed, Rng};
use crate::search::PolicySource;
use crate::sim::{Decision, DecisionMaker, DecisionView, Flip};
use serde::{Deserialize, Serialize};

/// Rules the agent can choose from, by action index.
pub const RULES: [DispatchRule; 4] = [DispatchRule::Spt, DispatchRule::Lpt, DispatchRule::Mtwr, DispatchRule::Str];

/// Flips the agent can choose from, by action index.
pub const FLIPS: [Flip; 3] = Flip::ALL;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActMode {
    Sample,
    #[default]
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub rule: usize,
    pub flip: usize,
    /// Joint log-probability of both choices.
    pub log_prob: f64,
    pub value: f64,
    pub rule_probs: Vec<f64>,
    pub flip_probs: Vec<f64>,
}

fn draw<R: rand::Rng + ?Sized>(logp: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, l) in logp.iter().enumerate() {
        acc += l.exp();
        if u < acc {
            return i;
        }
    }
    logp.len() - 1
}

fn argmax(logp: &[f64]) -> usize {
    logp.iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > logp[best] { i } else { best })
}

pub(crate) fn act_normalized<R: rand::Rng + ?Sized>(net: &PolicyNet, input: &[f64], mode: ActMode, rng: &mut R) -> Action {
    let f = net.forward(input);
    let (l1, l2) = net.log_probs(&f);
    let (rule, flip) = match mode {
        ActMode::Greedy => (argmax(&l1), argmax(&l2)),
        ActMode::Sample => (draw(&l1, rng), draw(&l2, rng)),
    };
    Action {
        rule,
        flip,
        log_prob: l1[rule] + l2[flip],
        value: f.value,
        rule_probs: l1.iter().map(|v| v.exp()).collect(),
        flip_probs: l2.iter().map(|v| v.exp()).collect(),
    }
}

impl PolicyNet {
    /// Chooses both actions for raw features. Greedy mode takes each
    /// group's most probable action and never touches `rng`.
    pub fn act<R: rand::Rng + ?Sized>(&self, features: &[f64], mode: ActMode, rng: &mut R) -> Result<Action> {
        let input = self.prepare(features)?;
        Ok(act_normalized(self, &input, mode, rng))
    }
}

/// Trained network used as a decision maker inside search.
#[derive(Clone, Debug)]
pub struct AgentPolicy {
    pub net: PolicyNet,
    pub mode: ActMode,
}

struct NetDecider<'a> {
    net: &'a PolicyNet,
    mode: ActMode,
    rng: Rng,
}

impl DecisionMaker for NetDecider<'_> {
    fn decide(&mut self, view: &DecisionView<'_>) -> Result<Decision> {
        let a = self.net.act(view.features, self.mode, &mut self.rng)?;
        Ok(Decision {
            rule: RULES[a.rule],
            flip: FLIPS[a.flip],
        })
    }
}

impl PolicySource for AgentPolicy {
    fn decider(&self, stream: u64) -> Box<dyn DecisionMaker + '_> {
        Box::new(NetDecider {
            net: &self.net,
            mode: self.mode,
            rng: from_seed(stream),
        })
    }
}
