use super::{resolve_baseline, Evaluator, Heuristic, SearchConfig, SearchResult};
use crate::error::{Error, Result};
use crate::genome::operators::{balanced_assignments, genome_from_map};
use crate::genome::{canonical_order, init_population, task_assignments, Assignment, DispatchRule, Genome};
use crate::instance::{
    check_schedule_feasibility, scalarize, Baseline, ProblemInstance, Schedule, ScheduleMetrics, TaskRef,
};
use crate::sim::{simulate, simulate_with, SimOptions};

const REFERENCE_SEED: u64 = 0x0BA5_E11E;
const REFERENCE_POPULATION: usize = 50;

/// Objective reference for an instance: makespan and tardiness of the best
/// (by weighted raw sum) of a fixed-seed initial population. Does not touch
/// any search budget.
pub fn reference_baseline(instance: &ProblemInstance) -> Result<Baseline> {
    let w = instance.weights;
    let mut best: Option<ScheduleMetrics> = None;
    for g in init_population(instance, REFERENCE_POPULATION, REFERENCE_SEED)? {
        let m = simulate(instance, &g)?.metrics;
        let raw = |m: &ScheduleMetrics| w.makespan * m.makespan + w.tardiness * m.total_tardiness;
        if best.as_ref().is_none_or(|b| raw(&m) < raw(b)) {
            best = Some(m);
        }
    }
    let m = best.ok_or(Error::EmptySchedule)?;
    Ok(Baseline::from(&m))
}

/// One simulation with load-balanced assignments along the canonical task
/// order and `rule` on every station.
pub fn run_dispatch_baseline(
    instance: &ProblemInstance,
    rule: DispatchRule,
    config: &SearchConfig,
) -> Result<SearchResult> {
    let heuristic = match rule {
        DispatchRule::Str => Heuristic::Str,
        DispatchRule::Mtwr => Heuristic::Mtwr,
        other => return Err(Error::Config(format!("no baseline heuristic for rule `{other}`"))),
    };
    let baseline = resolve_baseline(instance, config)?;
    let order = canonical_order(instance)?;
    let visit: Vec<TaskRef> = order.iter().map(|&(t, _)| t).collect();
    let map = balanced_assignments(instance, &visit)?;
    let genome = genome_from_map(instance, &order, &map, vec![rule; instance.stations.len()]);
    let mut ev = Evaluator::new(instance, baseline, None, 1, 1)?;
    let out = ev.evaluate(vec![(genome, 0)])?;
    ev.record(0, out[0].z);
    ev.finish(heuristic, 0, 1)
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub genome: Genome,
    /// Global dispatch priority that produced the schedule.
    pub priority: Vec<TaskRef>,
    pub schedule: Schedule,
    pub metrics: ScheduleMetrics,
    pub z: f64,
    pub enumerated: u128,
}

/// Number of (assignment combination, priority order) pairs the oracle
/// would decode; saturates at `u128::MAX`.
pub fn enumeration_size(instance: &ProblemInstance) -> u128 {
    let mut size: u128 = 1;
    for (i, t) in instance.tasks().enumerate() {
        size = size
            .saturating_mul(task_assignments(instance, t).len() as u128)
            .saturating_mul(i as u128 + 1);
    }
    size
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive search over every assignment combination and every global
/// priority order, each decoded by the simulator. Exact within the space
/// of schedules the simulator can produce.
pub fn brute_force(instance: &ProblemInstance, baseline: &Baseline, cap: u128) -> Result<OracleResult> {
    let size = enumeration_size(instance);
    if size > cap {
        return Err(Error::EnumerationCap { size, cap });
    }
    let order = canonical_order(instance)?;
    let options: Vec<Vec<Assignment>> = order.iter().map(|&(t, _)| task_assignments(instance, t)).collect();
    if let Some(i) = options.iter().position(Vec::is_empty) {
        return Err(Error::Unschedulable(order[i].0));
    }
    let tasks: Vec<TaskRef> = instance.tasks().collect();
    let rules = vec![DispatchRule::Fifo; instance.stations.len()];

    let mut best: Option<OracleResult> = None;
    let mut pick = vec![0usize; options.len()];
    loop {
        let chosen: Vec<Assignment> = pick.iter().zip(&options).map(|(&i, o)| o[i]).collect();
        let genome = Genome::from_assignments(instance, &chosen, &rules)?;
        let mut perm: Vec<usize> = (0..tasks.len()).collect();
        loop {
            let priority: Vec<TaskRef> = perm.iter().map(|&i| tasks[i]).collect();
            let opts = SimOptions {
                forced_priority: Some(priority.clone()),
                ..Default::default()
            };
            let out = simulate_with(instance, &genome, None, &opts)?;
            let z = scalarize(&out.metrics, baseline, instance.weights)?;
            let better = best.as_ref().is_none_or(|b| {
                z.total_cmp(&b.z)
                    .then(out.metrics.makespan.total_cmp(&b.metrics.makespan))
                    .then(out.metrics.total_tardiness.total_cmp(&b.metrics.total_tardiness))
                    .is_lt()
            });
            if better && check_schedule_feasibility(instance, &out.schedule).is_empty() {
                best = Some(OracleResult {
                    genome: out.genome,
                    priority,
                    schedule: out.schedule,
                    metrics: out.metrics,
                    z,
                    enumerated: size,
                });
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        // odometer over assignment choices
        let mut k = 0;
        while k < pick.len() {
            pick[k] += 1;
            if pick[k] < options[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            break;
        }
    }
    best.ok_or(Error::EmptySchedule)
}
