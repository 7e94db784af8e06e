//! Simulation-based metaheuristics sharing one evaluation budget: a genetic
//! algorithm with adaptive rates, its memetic variants with annealing and an
//! agent in the loop, annealing with restarts, tabu search, single-rule
//! dispatching baselines and an exhaustive oracle for tiny instances.

mod ga;
mod oracle;
mod trajectory;

#[cfg(test)]
mod tests;

pub use ga::{run_ga, run_gasa, run_gasa_rl};
pub use oracle::{brute_force, enumeration_size, reference_baseline, run_dispatch_baseline, OracleResult};
pub use trajectory::{acceptance_probability, run_sars, run_ts, tabu_select, TabuAttr};

use crate::error::{Error, Result};
use crate::genome::Genome;
use crate::instance::{scalarize, Baseline, ProblemInstance, Schedule, ScheduleMetrics};
use crate::sim::{simulate_with, DecisionMaker, FollowGenome, SimOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    Str,
    Mtwr,
    Ts,
    Sars,
    Ga,
    Gasa,
    GasaRl,
}

impl Heuristic {
    pub const ALL: [Heuristic; 7] = [
        Self::Str,
        Self::Mtwr,
        Self::Ts,
        Self::Sars,
        Self::Ga,
        Self::Gasa,
        Self::GasaRl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Str => "str",
            Self::Mtwr => "mtwr",
            Self::Ts => "ts",
            Self::Sars => "sars",
            Self::Ga => "ga",
            Self::Gasa => "gasa",
            Self::GasaRl => "gasa-rl",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|h| h.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown heuristic `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_evaluations: usize,
    pub consumed: usize,
}

impl SearchBudget {
    pub fn new(max_evaluations: usize) -> Self {
        Self {
            max_evaluations,
            consumed: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.max_evaluations.saturating_sub(self.consumed)
    }

    pub fn exhausted(&self) -> bool {
        self.remaining() == 0
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self::new(500)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population_size: usize,
    pub survivors: usize,
    pub offspring: usize,
    /// Crossover probability at the first and last expected generation.
    pub crossover: (f64, f64),
    /// Mutation probability at the first and last expected generation.
    pub mutation: (f64, f64),
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            survivors: 8,
            offspring: 20,
            crossover: (0.1, 0.9),
            mutation: (0.9, 0.1),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.population_size == 0 || self.offspring == 0 || self.survivors == 0 {
            return Err(Error::Config("population, survivors and offspring must be positive".into()));
        }
        if self.survivors > self.population_size {
            return Err(Error::Config("survivors exceed population size".into()));
        }
        if ![self.crossover.0, self.crossover.1, self.mutation.0, self.mutation.1]
            .into_iter()
            .all(unit)
        {
            return Err(Error::Config("rate schedules must stay within [0, 1]".into()));
        }
        Ok(())
    }

    /// Generations a budget allows when every generation after the first
    /// evaluates a full offspring batch.
    pub fn expected_generations(&self, budget: usize) -> usize {
        1 + budget.saturating_sub(self.population_size).div_ceil(self.offspring)
    }

    /// Crossover and mutation probabilities for generation `gen` (>= 1),
    /// interpolated linearly over the expected generations.
    pub fn rates(&self, gen: usize, expected: usize) -> (f64, f64) {
        let span = expected.saturating_sub(2).max(1) as f64;
        let x = ((gen.max(1) - 1) as f64 / span).clamp(0.0, 1.0);
        let lerp = |(a, b): (f64, f64)| a + (b - a) * x;
        (lerp(self.crossover), lerp(self.mutation))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaConfig {
    /// Chance per generation that the memetic variants anneal the fittest genome.
    pub probability: f64,
    /// Annealing steps per memetic invocation.
    pub steps: usize,
    /// Neighbor samples used to calibrate the initial temperature.
    pub calibration_samples: usize,
    /// Acceptance probability of the median calibration delta.
    pub initial_acceptance: f64,
    pub cooling: f64,
    /// Non-improving steps before returning to the best genome.
    pub restart_after: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            probability: 0.5,
            steps: 25,
            calibration_samples: 5,
            initial_acceptance: 0.8,
            cooling: 0.95,
            restart_after: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TsConfig {
    pub tenure: usize,
    pub neighborhood: usize,
}

impl Default for TsConfig {
    fn default() -> Self {
        Self {
            tenure: 10,
            neighborhood: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub ga: GaConfig,
    pub sa: SaConfig,
    pub ts: TsConfig,
    /// Normalization reference for the objective; derived from the instance
    /// when absent.
    pub baseline: Option<Baseline>,
}

/// Hands out a decision maker per simulation run. `stream` is a seed unique
/// to the evaluation so that stochastic policies stay reproducible under
/// any batching.
pub trait PolicySource: Sync {
    fn decider(&self, stream: u64) -> Box<dyn DecisionMaker + '_>;
}

impl PolicySource for FollowGenome {
    fn decider(&self, _stream: u64) -> Box<dyn DecisionMaker + '_> {
        Box::new(FollowGenome)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub generation: usize,
    pub evaluations: usize,
    pub best_z: f64,
    pub mean_z: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub heuristic: Heuristic,
    pub seed: u64,
    pub baseline: Baseline,
    pub best_genome: Genome,
    pub best_schedule: Schedule,
    pub best_metrics: ScheduleMetrics,
    pub best_z: f64,
    /// One record per generation (or iteration for trajectory methods).
    pub progress: Vec<ProgressRecord>,
    pub evaluations: usize,
    pub wall_seconds: f64,
    pub parallelism: usize,
}

impl SearchResult {
    pub fn seconds_per_iteration(&self) -> f64 {
        self.wall_seconds / self.progress.len().max(1) as f64
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Evaluated {
    pub genome: Genome,
    pub z: f64,
    pub metrics: ScheduleMetrics,
    pub schedule: Schedule,
}

pub(crate) fn mean_z(evaluated: &[Evaluated]) -> f64 {
    evaluated.iter().map(|e| e.z).sum::<f64>() / evaluated.len().max(1) as f64
}

impl Evaluated {
    /// Total order used for every ranking: Z, then makespan, then tardiness.
    pub fn better_than(&self, other: &Evaluated) -> bool {
        self.key_cmp(other) == std::cmp::Ordering::Less
    }

    pub fn key_cmp(&self, other: &Evaluated) -> std::cmp::Ordering {
        self.z
            .total_cmp(&other.z)
            .then(self.metrics.makespan.total_cmp(&other.metrics.makespan))
            .then(self.metrics.total_tardiness.total_cmp(&other.metrics.total_tardiness))
    }
}

/// Owns the budget and the incumbent; every simulation goes through here.
pub(crate) struct Evaluator<'a> {
    pub instance: &'a ProblemInstance,
    pub baseline: Baseline,
    policy: Option<&'a dyn PolicySource>,
    pub budget: SearchBudget,
    pub best: Option<Evaluated>,
    pool: Option<rayon::ThreadPool>,
    pub started: Instant,
    pub progress: Vec<ProgressRecord>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        instance: &'a ProblemInstance,
        baseline: Baseline,
        policy: Option<&'a dyn PolicySource>,
        budget: usize,
        parallelism: usize,
    ) -> Result<Self> {
        let pool = if parallelism > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(parallelism)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            instance,
            baseline,
            policy,
            budget: SearchBudget::new(budget),
            best: None,
            pool,
            started: Instant::now(),
            progress: Vec::new(),
        })
    }

    fn evaluate_one(&self, genome: &Genome, stream: u64) -> Result<Evaluated> {
        let outcome = match self.policy {
            Some(p) => {
                let mut d = p.decider(stream);
                simulate_with(self.instance, genome, Some(d.as_mut()), &SimOptions::default())?
            }
            None => simulate_with(self.instance, genome, None, &SimOptions::default())?,
        };
        let z = scalarize(&outcome.metrics, &self.baseline, self.instance.weights)?;
        Ok(Evaluated {
            genome: outcome.genome,
            z,
            metrics: outcome.metrics,
            schedule: outcome.schedule,
        })
    }

    /// Evaluates as many of the candidates as the budget allows, in order.
    /// Each candidate carries its own policy stream.
    pub fn evaluate(&mut self, mut batch: Vec<(Genome, u64)>) -> Result<Vec<Evaluated>> {
        batch.truncate(self.budget.remaining());
        let results: Vec<Result<Evaluated>> = match &self.pool {
            Some(pool) => pool.install(|| batch.par_iter().map(|(g, s)| self.evaluate_one(g, *s)).collect()),
            None => batch.iter().map(|(g, s)| self.evaluate_one(g, *s)).collect(),
        };
        self.budget.consumed += batch.len();
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        for e in &results {
            if self.best.as_ref().is_none_or(|b| e.better_than(b)) {
                self.best = Some(e.clone());
            }
        }
        Ok(results)
    }

    pub fn best_z(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.z)
    }

    pub fn record(&mut self, generation: usize, mean_z: f64) {
        self.progress.push(ProgressRecord {
            generation,
            evaluations: self.budget.consumed,
            best_z: self.best_z(),
            mean_z,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        });
    }

    pub fn finish(self, heuristic: Heuristic, seed: u64, parallelism: usize) -> Result<SearchResult> {
        let best = self.best.ok_or(Error::BudgetTooSmall {
            budget: self.budget.max_evaluations,
            population: 1,
        })?;
        Ok(SearchResult {
            heuristic,
            seed,
            baseline: self.baseline,
            best_genome: best.genome,
            best_schedule: best.schedule,
            best_metrics: best.metrics,
            best_z: best.z,
            progress: self.progress,
            evaluations: self.budget.consumed,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            parallelism,
        })
    }
}

pub(crate) fn resolve_baseline(instance: &ProblemInstance, config: &SearchConfig) -> Result<Baseline> {
    match config.baseline {
        Some(b) => Ok(b),
        None => reference_baseline(instance),
    }
}

/// Runs `heuristic` with the given settings. `policy` is required for
/// [`Heuristic::GasaRl`] and ignored otherwise.
pub fn run_heuristic(
    instance: &ProblemInstance,
    heuristic: Heuristic,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
    parallelism: usize,
    policy: Option<&dyn PolicySource>,
) -> Result<SearchResult> {
    use crate::genome::DispatchRule;
    match heuristic {
        Heuristic::Str => run_dispatch_baseline(instance, DispatchRule::Str, config),
        Heuristic::Mtwr => run_dispatch_baseline(instance, DispatchRule::Mtwr, config),
        Heuristic::Ts => run_ts(instance, None, config, budget, seed, parallelism),
        Heuristic::Sars => run_sars(instance, None, config, budget, seed),
        Heuristic::Ga => run_ga(instance, config, budget, seed, parallelism),
        Heuristic::Gasa => run_gasa(instance, config, budget, seed, parallelism),
        Heuristic::GasaRl => {
            let policy = policy.ok_or_else(|| Error::Config("gasa-rl needs a policy".into()))?;
            run_gasa_rl(instance, config, budget, seed, parallelism, policy)
        }
    }
}
