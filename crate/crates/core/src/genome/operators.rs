use super::{canonical_order, task_assignments, AllocationGene, Assignment, DispatchGene, DispatchRule, Genome};
use crate::error::{Error, Result};
use crate::instance::{ProblemInstance, TaskGraph, TaskRef};
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

const INIT_STREAM: u64 = 0x1A17;

/// What a mutation changed; used as the tabu attribute by trajectory search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Resource { position: usize, from: Assignment, to: Assignment },
    Rule { station: usize, from: DispatchRule, to: DispatchRule },
}

/// Random linear extension of the task DAG built by repeatedly drawing a
/// ready task uniformly.
fn random_linearization<R: Rng + ?Sized>(graph: &TaskGraph, rng: &mut R) -> Vec<TaskRef> {
    let mut remaining: Vec<usize> = graph.preds.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..graph.len()).filter(|&v| remaining[v] == 0).collect();
    let mut out = Vec::with_capacity(graph.len());
    while !ready.is_empty() {
        let v = ready.swap_remove(rng.gen_range(0..ready.len()));
        out.push(graph.refs[v]);
        for &s in &graph.succs[v] {
            remaining[s] -= 1;
            if remaining[s] == 0 {
                ready.push(s);
            }
        }
        ready.sort_unstable();
    }
    out
}

fn argmin_by_load(candidates: impl Iterator<Item = usize>, load: &[f64]) -> Option<usize> {
    candidates.fold(None, |best: Option<usize>, c| match best {
        Some(b) if load[b] < load[c] || (load[b] == load[c] && b < c) => Some(b),
        _ => Some(c),
    })
}

/// Assigns stations and workers in the given task order, always picking the
/// station with the least accumulated processing load and then the least
/// loaded capable workers. Ties go to the lowest index.
pub(crate) fn balanced_assignments(
    instance: &ProblemInstance,
    visit: &[TaskRef],
) -> Result<BTreeMap<TaskRef, Assignment>> {
    let mut station_load = vec![0.0; instance.stations.len()];
    let mut worker_load = vec![0.0; instance.workers.len()];
    let mut out = BTreeMap::new();
    for &t in visit {
        let spec = instance.task(t);
        let station = argmin_by_load(spec.alternatives.iter().map(|a| a.station), &station_load)
            .ok_or(Error::Unschedulable(t))?;
        let alt = spec.alternative(station).expect("station from alternatives");
        let setup_worker = if instance.needs_setup(station) {
            let w = argmin_by_load(alt.setup.iter().map(|w| w.worker), &worker_load).ok_or(Error::Unschedulable(t))?;
            worker_load[w] += alt.setup_duration(w).unwrap_or(0.0);
            Some(w)
        } else {
            None
        };
        let pw = argmin_by_load(alt.processing.iter().map(|w| w.worker), &worker_load).ok_or(Error::Unschedulable(t))?;
        let d = alt.processing_duration(pw).unwrap_or(0.0);
        worker_load[pw] += d;
        station_load[station] += d;
        out.insert(
            t,
            Assignment {
                station,
                setup_worker,
                processing_worker: pw,
            },
        );
    }
    Ok(out)
}

pub(crate) fn genome_from_map(
    instance: &ProblemInstance,
    order: &[(TaskRef, usize)],
    map: &BTreeMap<TaskRef, Assignment>,
    rules: Vec<DispatchRule>,
) -> Genome {
    Genome {
        fingerprint: instance.fingerprint(),
        allocation: order
            .iter()
            .map(|&(task, group)| {
                let a = map[&task];
                AllocationGene {
                    task,
                    group,
                    station: a.station,
                    setup_worker: a.setup_worker,
                    processing_worker: a.processing_worker,
                }
            })
            .collect(),
        dispatching: rules
            .into_iter()
            .enumerate()
            .map(|(station, rule)| DispatchGene { station, rule })
            .collect(),
    }
}

/// Builds `size` genomes: random precedence-respecting visiting order,
/// load-balanced resource assignment along that order, and a uniformly
/// random rule per station. Genome `i` draws from its own random substream.
pub fn init_population(instance: &ProblemInstance, size: usize, seed: u64) -> Result<Vec<Genome>> {
    if let Some(t) = instance.tasks().find(|&t| instance.task(t).alternatives.is_empty()) {
        return Err(Error::Unschedulable(t));
    }
    let graph = TaskGraph::new(instance);
    graph.layers()?;
    let order = canonical_order(instance)?;
    (0..size)
        .map(|i| {
            let mut r = rng::substream(seed, &[INIT_STREAM, i as u64]);
            let visit = random_linearization(&graph, &mut r);
            let map = balanced_assignments(instance, &visit)?;
            let rules = (0..instance.stations.len())
                .map(|_| *DispatchRule::ALL.choose(&mut r).expect("non-empty"))
                .collect();
            Ok(genome_from_map(instance, &order, &map, rules))
        })
        .collect()
}

fn check_pair(a: &Genome, b: &Genome) -> Result<()> {
    if a.fingerprint != b.fingerprint
        || a.allocation.len() != b.allocation.len()
        || a.dispatching.len() != b.dispatching.len()
    {
        return Err(Error::InstanceMismatch);
    }
    Ok(())
}

/// Crossover with an explicit set of gene positions taken from `a`. The
/// remaining positions are filled with the genes of the other tasks in the
/// order they appear in `b`. Rules are inherited from `a`.
pub fn jox_with_selection(a: &Genome, b: &Genome, selected: &[usize]) -> Result<Genome> {
    check_pair(a, b)?;
    let n = a.allocation.len();
    let mut keep = vec![false; n];
    for &p in selected {
        if p >= n {
            return Err(Error::InvalidGenome(format!("selection position {p} out of range")));
        }
        keep[p] = true;
    }
    let taken: BTreeSet<TaskRef> = (0..n).filter(|&p| keep[p]).map(|p| a.allocation[p].task).collect();
    let mut fill = b.allocation.iter().filter(|g| !taken.contains(&g.task));
    let mut child = a.clone();
    for (p, slot) in child.allocation.iter_mut().enumerate() {
        if !keep[p] {
            let g = fill.next().ok_or(Error::InstanceMismatch)?;
            if g.task != slot.task {
                // parents disagree on gene layout
                return Err(Error::InstanceMismatch);
            }
            *slot = *g;
        }
    }
    Ok(child)
}

/// Job-order crossover: copies a random non-empty proper subset of `a`'s
/// allocation genes and takes the rest from `b`. With a single gene the
/// child is a clone of `a`.
pub fn jox_crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome> {
    check_pair(a, b)?;
    let n = a.allocation.len();
    if n <= 1 {
        return Ok(a.clone());
    }
    let k = rng.gen_range(1..n);
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    positions.truncate(k);
    positions.sort_unstable();
    jox_with_selection(a, b, &positions)
}

fn rule_flip<R: Rng + ?Sized>(genome: &mut Genome, rng: &mut R) -> Option<Move> {
    if genome.dispatching.is_empty() {
        return None;
    }
    let station = rng.gen_range(0..genome.dispatching.len());
    let from = genome.dispatching[station].rule;
    let others: Vec<DispatchRule> = DispatchRule::ALL.into_iter().filter(|&r| r != from).collect();
    let to = *others.choose(rng)?;
    genome.dispatching[station].rule = to;
    Some(Move::Rule { station, from, to })
}

fn resource_flip<R: Rng + ?Sized>(genome: &mut Genome, instance: &ProblemInstance, rng: &mut R) -> Option<Move> {
    let mut positions: Vec<usize> = (0..genome.allocation.len()).collect();
    positions.shuffle(rng);
    for p in positions {
        let gene = &mut genome.allocation[p];
        let from = gene.assignment();
        let options: Vec<Assignment> = task_assignments(instance, gene.task)
            .into_iter()
            .filter(|a| *a != from)
            .collect();
        if let Some(&to) = options.choose(rng) {
            gene.set_assignment(to);
            return Some(Move::Resource { position: p, from, to });
        }
    }
    None
}

/// Flip mutation: a resource flip with probability one half, otherwise a
/// dispatching-rule flip. When no gene has an alternative assignment the
/// rule flip is used instead.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, instance: &ProblemInstance, rng: &mut R) -> Result<(Genome, Move)> {
    let mut child = genome.clone();
    let mv = if rng.gen_bool(0.5) {
        match resource_flip(&mut child, instance, rng) {
            Some(m) => Some(m),
            None => rule_flip(&mut child, rng),
        }
    } else {
        rule_flip(&mut child, rng)
    };
    let mv = mv.ok_or_else(|| Error::InvalidGenome("genome has no dispatching genes".into()))?;
    Ok((child, mv))
}
