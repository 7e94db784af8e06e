use super::{mean_z, resolve_baseline, Evaluated, Evaluator, Heuristic, SaConfig, SearchConfig, SearchResult};
use crate::error::Result;
use crate::genome::{init_population, mutate, Assignment, DispatchRule, Genome, Move};
use crate::instance::ProblemInstance;
use crate::rng::{derive_seed, substream, Rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

const START: u64 = 0x7A00;
const SARS: u64 = 0x7A01;
const TABU: u64 = 0x7A02;

/// Metropolis acceptance: 1 for non-worsening moves, `exp(-delta / t)`
/// otherwise, and 0 for a worsening move at zero temperature.
pub fn acceptance_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else if temperature > 0.0 {
        (-delta / temperature).exp()
    } else {
        0.0
    }
}

fn initial_temperature(samples: &mut [f64], acceptance: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    let median = if samples.is_empty() {
        0.0
    } else if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    };
    let scale = if median > 0.0 {
        median
    } else {
        samples.iter().copied().fold(0.0, f64::max).max(1e-6)
    };
    scale / (1.0 / acceptance).ln()
}

/// Simulated annealing over mutation neighbors starting from `start`.
/// The first `calibration_samples` steps only accept non-worsening moves
/// and fix the initial temperature from the median absolute delta; after
/// that the temperature cools geometrically per step. With `restart` the
/// walk returns to the best genome (and the initial temperature) after a
/// stall. Returns the best genome seen.
pub(crate) fn anneal(
    ev: &mut Evaluator<'_>,
    start: Evaluated,
    cfg: &SaConfig,
    rng: &mut Rng,
    steps: usize,
    restart: bool,
    record: bool,
) -> Result<Evaluated> {
    let mut current = start.clone();
    let mut best = start;
    let mut samples = Vec::new();
    let mut t0 = None;
    let mut temp = 0.0;
    let mut stall = 0;
    for step in 0..steps {
        if ev.budget.exhausted() {
            break;
        }
        let (g, _) = mutate(&current.genome, ev.instance, rng)?;
        let stream = rng.gen();
        let Some(cand) = ev.evaluate(vec![(g, stream)])?.pop() else {
            break;
        };
        let delta = cand.z - current.z;
        let accept = match t0 {
            None => {
                samples.push(delta.abs());
                if samples.len() >= cfg.calibration_samples.max(1) {
                    let t = initial_temperature(&mut samples, cfg.initial_acceptance);
                    t0 = Some(t);
                    temp = t;
                }
                delta <= 0.0
            }
            Some(_) => {
                let p = acceptance_probability(delta, temp);
                temp *= cfg.cooling;
                p >= 1.0 || rng.gen::<f64>() < p
            }
        };
        if cand.better_than(&best) {
            best = cand.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        if accept {
            current = cand;
        }
        if restart && stall >= cfg.restart_after {
            current = best.clone();
            temp = t0.unwrap_or(0.0);
            stall = 0;
        }
        if record {
            ev.record(step + 1, current.z);
        }
    }
    Ok(best)
}

fn start_genome(instance: &ProblemInstance, start: Option<Genome>, seed: u64) -> Result<Genome> {
    match start {
        Some(g) => {
            g.validate(instance)?;
            Ok(g)
        }
        None => Ok(init_population(instance, 1, derive_seed(seed, &[START]))?.remove(0)),
    }
}

/// Annealing with restarts from `start` (or a random initial genome). One
/// progress record per step.
pub fn run_sars(
    instance: &ProblemInstance,
    start: Option<Genome>,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
) -> Result<SearchResult> {
    let baseline = resolve_baseline(instance, config)?;
    let mut ev = Evaluator::new(instance, baseline, None, budget, 1)?;
    let g = start_genome(instance, start, seed)?;
    let Some(first) = ev.evaluate(vec![(g, 0)])?.pop() else {
        return ev.finish(Heuristic::Sars, seed, 1);
    };
    ev.record(0, first.z);
    let mut r = substream(seed, &[SARS]);
    anneal(&mut ev, first, &config.sa, &mut r, usize::MAX, true, true)?;
    ev.finish(Heuristic::Sars, seed, 1)
}

/// Move attribute stored in the tabu list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TabuAttr {
    Resource { position: usize, assignment: Assignment },
    Rule { station: usize, rule: DispatchRule },
}

impl TabuAttr {
    /// Attribute a move establishes.
    pub fn target(mv: &Move) -> Self {
        match *mv {
            Move::Resource { position, to, .. } => Self::Resource {
                position,
                assignment: to,
            },
            Move::Rule { station, to, .. } => Self::Rule { station, rule: to },
        }
    }

    /// Attribute that would undo a move.
    pub fn reverse(mv: &Move) -> Self {
        match *mv {
            Move::Resource { position, from, .. } => Self::Resource {
                position,
                assignment: from,
            },
            Move::Rule { station, from, .. } => Self::Rule { station, rule: from },
        }
    }
}

/// Picks the best admissible candidate: not tabu, or better than the
/// global best. When nothing is admissible the oldest tabu entry is
/// dropped and the best candidate is taken regardless.
pub fn tabu_select(candidates: &[(f64, TabuAttr)], tabu: &mut VecDeque<TabuAttr>, global_best: f64) -> Option<usize> {
    let argmin = |filter: &dyn Fn(&(f64, TabuAttr)) -> bool| {
        candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| filter(c))
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .map(|(i, _)| i)
    };
    if let Some(i) = argmin(&|(z, a)| !tabu.contains(a) || *z < global_best) {
        return Some(i);
    }
    tabu.pop_front();
    argmin(&|_| true)
}

/// Tabu search over sampled mutation neighborhoods. One progress record
/// per neighborhood.
pub fn run_ts(
    instance: &ProblemInstance,
    start: Option<Genome>,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
    parallelism: usize,
) -> Result<SearchResult> {
    let baseline = resolve_baseline(instance, config)?;
    let mut ev = Evaluator::new(instance, baseline, None, budget, parallelism.max(1))?;
    let g = start_genome(instance, start, seed)?;
    let Some(mut current) = ev.evaluate(vec![(g, 0)])?.pop() else {
        return ev.finish(Heuristic::Ts, seed, parallelism.max(1));
    };
    ev.record(0, current.z);
    let mut tabu = VecDeque::new();
    let mut iteration = 0;
    while !ev.budget.exhausted() {
        iteration += 1;
        let mut r = substream(seed, &[TABU, iteration as u64]);
        let mut moves = Vec::new();
        let mut batch = Vec::new();
        for _ in 0..config.ts.neighborhood.max(1) {
            let (g, mv) = mutate(&current.genome, instance, &mut r)?;
            moves.push(mv);
            batch.push((g, 0));
        }
        let global_best = ev.best_z();
        let evaluated = ev.evaluate(batch)?;
        let cands: Vec<(f64, TabuAttr)> = evaluated
            .iter()
            .zip(&moves)
            .map(|(e, mv)| (e.z, TabuAttr::target(mv)))
            .collect();
        if let Some(i) = tabu_select(&cands, &mut tabu, global_best) {
            tabu.push_back(TabuAttr::reverse(&moves[i]));
            while tabu.len() > config.ts.tenure {
                tabu.pop_front();
            }
            current = evaluated[i].clone();
        }
        ev.record(iteration, mean_z(&evaluated));
    }
    ev.finish(Heuristic::Ts, seed, parallelism.max(1))
}
