//! State features observed by the agent at a decision point. Ratios whose
//! denominator is zero evaluate to 0.

use super::{Engine, Status};
use std::collections::BTreeSet;

pub const FEATURE_COUNT: usize = 17;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "relative_time",
    "production_stage",
    "relative_station_wip",
    "mean_successor_wip",
    "mean_station_wip",
    "relative_worker_wip",
    "relative_processable",
    "competing_tasks",
    "slots",
    "station_throughput",
    "mean_successor_throughput",
    "mean_throughput",
    "throughput_std",
    "min_station_slack",
    "mean_station_slack",
    "mean_slack",
    "slack_std",
];

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn mean(xs: &[f64]) -> f64 {
    ratio(xs.iter().sum(), xs.len() as f64)
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub(super) fn extract(e: &Engine<'_, '_>, k: usize) -> [f64; FEATURE_COUNT] {
    let n_st = e.inst.stations.len();
    let station_wip: Vec<f64> = (0..n_st).map(|s| e.station_wip(s)).collect();
    let total_wip: f64 = station_wip.iter().sum();
    let mean_wip = mean(&station_wip);

    let queue = &e.queues[k];
    let successors: BTreeSet<usize> = queue
        .iter()
        .flat_map(|&v| e.graph.succs[v].iter())
        .flat_map(|&x| e.inst.task(e.graph.refs[x]).alternatives.iter().map(|a| a.station))
        .collect();
    let succ_wip: Vec<f64> = successors.iter().map(|&s| station_wip[s]).collect();

    // workers serving the station's unfinished tasks
    let mut station_workers = BTreeSet::new();
    for v in 0..e.graph.len() {
        if e.status[v] != Status::Done && e.assign[v].station == k {
            station_workers.insert(e.assign[v].processing_worker);
            if let Some(w) = e.assign[v].setup_worker {
                station_workers.insert(w);
            }
        }
    }
    let worker_wip = e.worker_wip();
    let mean_worker_wip = mean(&worker_wip);
    let relative_worker = ratio(station_workers.iter().map(|&w| worker_wip[w]).sum(), mean_worker_wip);

    let processable_here = queue.iter().filter(|&&v| e.processable(v)).count();
    let processable_all: usize = e.queues.iter().flatten().filter(|&&v| e.processable(v)).count();

    let throughput: Vec<f64> = e.completed.iter().map(|&c| ratio(c as f64, e.clock)).collect();
    let succ_throughput: Vec<f64> = successors.iter().map(|&s| throughput[s]).collect();

    let slack_of_jobs = |tasks: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
        let mut seen = BTreeSet::new();
        tasks
            .filter(|&v| seen.insert(e.graph.refs[v].job))
            .filter_map(|v| e.job_slack(v))
            .collect()
    };
    let station_slack = slack_of_jobs(&mut queue.iter().copied());
    let all_slack = slack_of_jobs(&mut e.queues.iter().flatten().copied());

    let groups: Vec<f64> = queue.iter().map(|&v| e.groups[v] as f64).collect();

    [
        ratio(e.clock, mean_wip),
        mean(&groups),
        ratio(station_wip[k], total_wip),
        mean(&succ_wip),
        mean_wip,
        relative_worker,
        ratio(processable_here as f64, processable_all as f64),
        if processable_here > 1 { 1.0 } else { 0.0 },
        e.inst.stations[k].slots as f64,
        throughput[k],
        mean(&succ_throughput),
        mean(&throughput),
        std_dev(&throughput),
        station_slack.iter().copied().reduce(f64::min).unwrap_or(0.0),
        mean(&station_slack),
        mean(&all_slack),
        std_dev(&all_slack),
    ]
}
