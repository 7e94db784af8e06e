//! Shaping reward per decision and the end-of-episode reward.

use crate::genome::DispatchRule;
use crate::sim::Flip;
use serde::{Deserialize, Serialize};

/// How the global throughput bonus compares consecutive states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThroughputBonus {
    /// Current mean throughput strictly above the last one.
    #[default]
    Improved,
    /// Last mean throughput was zero and the current one is positive.
    FromZero,
}

// zero-based positions of the features the reward reads
const STATION_WIP_REL: usize = 2;
const MEAN_WIP: usize = 4;
const WORKER_WIP_REL: usize = 5;
const COMPETING: usize = 7;
const SLOTS: usize = 8;
const MEAN_THROUGHPUT: usize = 11;
const MIN_SLACK: usize = 13;
const STATION_SLACK: usize = 14;
const MEAN_SLACK: usize = 15;

/// Reward for acting with `(rule, flip)` in state `last`, given the state
/// `current` observed at the next decision.
pub fn intermediate_reward(last: &[f64], current: &[f64], rule: DispatchRule, flip: Flip, bonus: ThroughputBonus) -> f64 {
    let mut r = 0.0;
    if flip == Flip::Station && last[COMPETING] == 0.0 {
        r = -3.0;
    } else if flip == Flip::Station && last[STATION_WIP_REL] > last[MEAN_WIP] {
        r = 2.0;
    } else if flip == Flip::Worker && last[SLOTS] != 0.0 && last[WORKER_WIP_REL] / last[SLOTS] > 1.0 {
        r = 1.0;
    }
    if rule == DispatchRule::Str && last[STATION_SLACK] < last[MEAN_SLACK] {
        r += 1.0;
    }
    let improved = match bonus {
        ThroughputBonus::Improved => current[MEAN_THROUGHPUT] > last[MEAN_THROUGHPUT],
        ThroughputBonus::FromZero => current[MEAN_THROUGHPUT] > last[MEAN_THROUGHPUT] && last[MEAN_THROUGHPUT] == 0.0,
    };
    if improved {
        r += 3.0;
    }
    if current[MIN_SLACK] > 0.0 {
        r += 3.0;
    }
    r
}

/// `(label - achieved) * 20 * steps^2`; positive when the episode beat the label.
pub fn final_reward(fit_label: f64, fit_achieved: f64, steps: usize) -> f64 {
    let s = steps as f64;
    (fit_label - fit_achieved) * 20.0 * s * s
}
