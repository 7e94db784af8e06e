//! Event-driven decoder. Every station owns a number of slots; each slot
//! cycles through dispatching, an optional setup, and processing. Setups are
//! started as soon as a task is dispatched and its setup worker is free, even
//! when the task cannot be processed yet (left-shifted setups).

mod dispatch;
mod features;

pub use dispatch::{setup_duration, sort_queue, QueueEntry};
pub use features::{FEATURE_COUNT, FEATURE_NAMES};

use crate::error::{Error, Result};
use crate::genome::{Assignment, DispatchRule, Genome};
use crate::instance::{
    makespan, total_tardiness, OpKind, Operation, ProblemInstance, Schedule, ScheduleMetrics, StationStats, TaskGraph,
    TaskRef, Time,
};
use serde::{Deserialize, Serialize};
use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

const EPS: f64 = 1e-9;

/// Second action group of the agent: move a task to another station, swap
/// a worker, or leave the assignment alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flip {
    Station,
    Worker,
    Keep,
}

impl Flip {
    pub const ALL: [Flip; 3] = [Flip::Station, Flip::Worker, Flip::Keep];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub rule: DispatchRule,
    pub flip: Flip,
}

/// State handed to a decision maker when a station sorts its queue.
#[derive(Clone, Copy, Debug)]
pub struct DecisionView<'a> {
    pub time: Time,
    pub station: usize,
    pub features: &'a [f64; FEATURE_COUNT],
    /// Rule carried by the station's dispatching gene.
    pub gene_rule: DispatchRule,
}

/// Chooses the dispatching rule and flip at every decision point.
pub trait DecisionMaker {
    fn decide(&mut self, view: &DecisionView<'_>) -> Result<Decision>;
}

/// Always returns the gene's rule and no flip.
#[derive(Clone, Copy, Debug, Default)]
pub struct FollowGenome;

impl DecisionMaker for FollowGenome {
    fn decide(&mut self, view: &DecisionView<'_>) -> Result<Decision> {
        Ok(Decision {
            rule: view.gene_rule,
            flip: Flip::Keep,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionPoint {
    pub time: Time,
    pub station: usize,
    /// Queued tasks that could start processing right now.
    pub processable: Vec<TaskRef>,
    pub features: Vec<f64>,
    pub rule: DispatchRule,
    pub requested_flip: Flip,
    /// Flip actually applied; degrades to `Keep` when no alternative exists.
    pub applied_flip: Flip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TracePhase {
    Dispatch,
    SetupStart,
    SetupEnd,
    ProcessingStart,
    ProcessingEnd,
}

impl TracePhase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dispatch => "dispatch",
            Self::SetupStart => "setup-start",
            Self::SetupEnd => "setup-end",
            Self::ProcessingStart => "processing-start",
            Self::ProcessingEnd => "processing-end",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: Time,
    pub station: usize,
    pub slot: usize,
    pub task: TaskRef,
    pub worker: Option<usize>,
    pub phase: TracePhase,
}

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    pub record_trace: bool,
    /// Global priority list; when set, every station dispatches the queued
    /// task that comes first in this list and rules are ignored.
    pub forced_priority: Option<Vec<TaskRef>>,
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub schedule: Schedule,
    pub metrics: ScheduleMetrics,
    pub decisions: Vec<DecisionPoint>,
    pub trace: Vec<TraceEvent>,
    /// Input genome with all applied flips written back.
    pub genome: Genome,
}

/// Decodes a genome using its own dispatching rules.
pub fn simulate(instance: &ProblemInstance, genome: &Genome) -> Result<SimOutcome> {
    simulate_with(instance, genome, None, &SimOptions::default())
}

/// Decodes a genome; when a decision maker is given it overrides the rule
/// and may flip assignments wherever a queue with a processable task is
/// sorted.
pub fn simulate_with(
    instance: &ProblemInstance,
    genome: &Genome,
    decider: Option<&mut dyn DecisionMaker>,
    options: &SimOptions,
) -> Result<SimOutcome> {
    genome.validate(instance)?;
    let mut engine = Engine::new(instance, genome, decider, options);
    engine.run()?;
    engine.finish(genome)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Waiting,
    Dispatched,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Free,
    WaitSetup(usize),
    Setup(usize),
    WaitProcess(usize),
    Processing(usize),
}

#[derive(Clone, Copy, Debug)]
enum EventKind {
    SetupDone { station: usize, slot: usize },
    ProcessingDone { station: usize, slot: usize },
    Release,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: Time,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

pub(crate) struct Engine<'a, 'd> {
    inst: &'a ProblemInstance,
    graph: TaskGraph,
    groups: Vec<usize>,
    assign: Vec<Assignment>,
    gene_pos: Vec<usize>,
    rules: Vec<DispatchRule>,
    status: Vec<Status>,
    queued_at: Vec<Option<Time>>,
    setup_started: Vec<bool>,
    proc_start: Vec<Option<Time>>,
    proc_end: Vec<Option<Time>>,
    queues: Vec<Vec<usize>>,
    slots: Vec<Vec<Phase>>,
    last_setup: Vec<Option<TaskRef>>,
    attention: Vec<f64>,
    completed: Vec<usize>,
    /// Due date a job must meet so that all due-dated successors can still
    /// finish on time.
    effective_due: Vec<Option<Time>>,
    rank: Option<Vec<usize>>,
    clock: Time,
    events: BinaryHeap<Reverse<Event>>,
    seq: u64,
    n_done: usize,
    ops: Vec<Operation>,
    decisions: Vec<DecisionPoint>,
    trace: Vec<TraceEvent>,
    record_trace: bool,
    decider: Option<&'d mut dyn DecisionMaker>,
}

impl<'a, 'd> Engine<'a, 'd> {
    fn new(
        inst: &'a ProblemInstance,
        genome: &Genome,
        decider: Option<&'d mut dyn DecisionMaker>,
        options: &SimOptions,
    ) -> Self {
        let graph = TaskGraph::new(inst);
        let n = graph.len();
        let mut assign = vec![
            Assignment {
                station: 0,
                setup_worker: None,
                processing_worker: 0
            };
            n
        ];
        let mut groups = vec![0; n];
        let mut gene_pos = vec![0; n];
        for (p, g) in genome.allocation.iter().enumerate() {
            let v = graph.index(g.task);
            assign[v] = g.assignment();
            groups[v] = g.group;
            gene_pos[v] = p;
        }
        let rank = options.forced_priority.as_ref().map(|order| {
            let mut r = vec![usize::MAX; n];
            for (i, &t) in order.iter().enumerate() {
                if inst.try_task(t).is_some() {
                    r[graph.index(t)] = r[graph.index(t)].min(i);
                }
            }
            r
        });
        let mut e = Self {
            inst,
            groups,
            assign,
            gene_pos,
            rules: genome.dispatching.iter().map(|g| g.rule).collect(),
            status: vec![Status::Waiting; n],
            queued_at: vec![None; n],
            setup_started: vec![false; n],
            proc_start: vec![None; n],
            proc_end: vec![None; n],
            queues: vec![Vec::new(); inst.stations.len()],
            slots: inst.stations.iter().map(|s| vec![Phase::Free; s.slots]).collect(),
            last_setup: vec![None; inst.stations.len()],
            attention: vec![0.0; inst.workers.len()],
            completed: vec![0; inst.stations.len()],
            effective_due: Vec::new(),
            rank,
            clock: 0.0,
            events: BinaryHeap::new(),
            seq: 0,
            n_done: 0,
            ops: Vec::with_capacity(2 * n),
            decisions: Vec::new(),
            trace: Vec::new(),
            record_trace: options.record_trace,
            decider,
            graph,
        };
        e.effective_due = e.compute_effective_due();
        e
    }

    fn processing_duration(&self, v: usize) -> Time {
        let a = &self.assign[v];
        self.inst
            .task(self.graph.refs[v])
            .alternative(a.station)
            .and_then(|alt| alt.processing_duration(a.processing_worker))
            .unwrap_or(0.0)
    }

    fn automation(&self, v: usize) -> f64 {
        self.inst
            .task(self.graph.refs[v])
            .alternative(self.assign[v].station)
            .map_or(1.0, |a| a.automation)
    }

    fn base_setup_duration(&self, v: usize) -> Time {
        let a = &self.assign[v];
        match a.setup_worker {
            Some(w) => self
                .inst
                .task(self.graph.refs[v])
                .alternative(a.station)
                .and_then(|alt| alt.setup_duration(w))
                .unwrap_or(0.0),
            None => 0.0,
        }
    }

    fn compute_effective_due(&self) -> Vec<Option<Time>> {
        let inst = self.inst;
        let n_jobs = inst.jobs.len();
        let work: Vec<Time> = (0..n_jobs)
            .map(|j| self.graph.job_range(j).map(|v| self.processing_duration(v)).sum())
            .collect();
        let mut succ = vec![Vec::new(); n_jobs];
        for e in &inst.job_precedence {
            succ[e.before].push(e.after);
        }
        let mut due: Vec<Option<Time>> = inst.jobs.iter().map(|j| j.due_date).collect();
        // relax along reverse topological order; job count is small
        for _ in 0..n_jobs {
            let mut changed = false;
            for j in 0..n_jobs {
                let from_succ = succ[j]
                    .iter()
                    .filter_map(|&s| due[s].map(|d| d - work[s]))
                    .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))));
                let best = match (inst.jobs[j].due_date, from_succ) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                if best != due[j] {
                    due[j] = best;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        due
    }

    fn remaining_work(&self, v: usize) -> Time {
        let t = self.graph.refs[v];
        let range = self.graph.job_range(t.job);
        (range.start + t.task..range.end)
            .filter(|&x| self.status[x] != Status::Done)
            .map(|x| self.processing_duration(x))
            .sum()
    }

    fn job_slack(&self, v: usize) -> Option<Time> {
        let t = self.graph.refs[v];
        self.effective_due[t.job].map(|d| d - self.clock - self.remaining_work(v))
    }

    fn processable(&self, v: usize) -> bool {
        let release = self.inst.task(self.graph.refs[v]).release;
        release <= self.clock + EPS && self.graph.preds[v].iter().all(|&p| self.status[p] == Status::Done)
    }

    fn push_event(&mut self, time: Time, kind: EventKind) {
        self.seq += 1;
        self.events.push(Reverse(Event {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn record(&mut self, station: usize, slot: usize, v: usize, worker: Option<usize>, phase: TracePhase) {
        if self.record_trace {
            self.trace.push(TraceEvent {
                time: self.clock,
                station,
                slot,
                task: self.graph.refs[v],
                worker,
                phase,
            });
        }
    }

    fn enqueue(&mut self, v: usize) {
        self.queued_at[v] = Some(self.clock);
        self.queues[self.assign[v].station].push(v);
    }

    fn run(&mut self) -> Result<()> {
        let n = self.graph.len();
        for v in 0..n {
            let r = self.inst.task(self.graph.refs[v]).release;
            if r > 0.0 {
                self.push_event(r, EventKind::Release);
            }
            if self.graph.preds[v].is_empty() {
                self.enqueue(v);
            }
        }
        loop {
            self.settle()?;
            if self.n_done == n {
                return Ok(());
            }
            let Some(Reverse(first)) = self.events.pop() else {
                let blocked = (0..n)
                    .filter(|&v| self.status[v] != Status::Done)
                    .map(|v| self.graph.refs[v])
                    .collect();
                return Err(Error::Deadlock { blocked });
            };
            self.clock = first.time;
            self.apply(first.kind);
            while let Some(Reverse(next)) = self.events.peek() {
                if next.time != self.clock {
                    break;
                }
                let kind = next.kind;
                self.events.pop();
                self.apply(kind);
            }
        }
    }

    fn apply(&mut self, kind: EventKind) {
        match kind {
            EventKind::Release => {}
            EventKind::SetupDone { station, slot } => {
                let Phase::Setup(v) = self.slots[station][slot] else {
                    unreachable!("setup completion on a slot that is not setting up")
                };
                let w = self.assign[v].setup_worker.expect("setup worker");
                self.release_attention(w, 1.0);
                self.slots[station][slot] = Phase::WaitProcess(v);
                self.record(station, slot, v, Some(w), TracePhase::SetupEnd);
            }
            EventKind::ProcessingDone { station, slot } => {
                let Phase::Processing(v) = self.slots[station][slot] else {
                    unreachable!("processing completion on an idle slot")
                };
                let w = self.assign[v].processing_worker;
                let u = self.automation(v);
                self.release_attention(w, u);
                self.status[v] = Status::Done;
                self.completed[station] += 1;
                self.n_done += 1;
                self.slots[station][slot] = Phase::Free;
                self.record(station, slot, v, Some(w), TracePhase::ProcessingEnd);
            }
        }
    }

    fn release_attention(&mut self, w: usize, amount: f64) {
        self.attention[w] -= amount;
        if self.attention[w].abs() < EPS {
            self.attention[w] = 0.0;
        }
    }

    /// Advances every slot as far as possible at the current clock.
    fn settle(&mut self) -> Result<()> {
        loop {
            let mut changed = false;
            for k in 0..self.slots.len() {
                for s in 0..self.slots[k].len() {
                    changed |= self.step_slot(k, s)?;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn step_slot(&mut self, k: usize, s: usize) -> Result<bool> {
        match self.slots[k][s] {
            Phase::Free => {
                let Some(v) = self.dispatch(k)? else {
                    return Ok(false);
                };
                self.status[v] = Status::Dispatched;
                self.record(k, s, v, None, TracePhase::Dispatch);
                self.slots[k][s] = if self.inst.needs_setup(k) {
                    Phase::WaitSetup(v)
                } else {
                    Phase::WaitProcess(v)
                };
                let succs = self.graph.succs[v].clone();
                for x in succs {
                    if self.queued_at[x].is_none()
                        && self.graph.preds[x].iter().all(|&p| self.status[p] != Status::Waiting)
                    {
                        self.enqueue(x);
                    }
                }
                Ok(true)
            }
            Phase::WaitSetup(v) => {
                let w = self.assign[v].setup_worker.expect("setup worker");
                if self.attention[w] > EPS {
                    return Ok(false);
                }
                let t = self.graph.refs[v];
                let d = setup_duration(self.inst, self.last_setup[k], t, k, w)?;
                self.attention[w] += 1.0;
                self.last_setup[k] = Some(t);
                self.setup_started[v] = true;
                self.ops.push(Operation {
                    task: t,
                    kind: OpKind::Setup,
                    station: k,
                    worker: w,
                    start: self.clock,
                    end: self.clock + d,
                });
                self.slots[k][s] = Phase::Setup(v);
                self.record(k, s, v, Some(w), TracePhase::SetupStart);
                self.push_event(self.clock + d, EventKind::SetupDone { station: k, slot: s });
                Ok(true)
            }
            Phase::WaitProcess(v) => {
                let w = self.assign[v].processing_worker;
                let u = self.automation(v);
                if !self.processable(v) || self.attention[w] + u > 1.0 + EPS {
                    return Ok(false);
                }
                let d = self.processing_duration(v);
                self.attention[w] += u;
                self.proc_start[v] = Some(self.clock);
                self.proc_end[v] = Some(self.clock + d);
                self.ops.push(Operation {
                    task: self.graph.refs[v],
                    kind: OpKind::Processing,
                    station: k,
                    worker: w,
                    start: self.clock,
                    end: self.clock + d,
                });
                self.slots[k][s] = Phase::Processing(v);
                self.record(k, s, v, Some(w), TracePhase::ProcessingStart);
                self.push_event(self.clock + d, EventKind::ProcessingDone { station: k, slot: s });
                Ok(true)
            }
            Phase::Setup(_) | Phase::Processing(_) => Ok(false),
        }
    }

    fn queue_entries(&self, k: usize) -> Vec<QueueEntry> {
        self.queues[k]
            .iter()
            .map(|&v| QueueEntry {
                task: self.graph.refs[v],
                processing: self.processing_duration(v),
                remaining_work: self.remaining_work(v),
                slack: self.job_slack(v),
                arrival: self.queued_at[v].unwrap_or(self.clock),
            })
            .collect()
    }

    /// Picks the next task for a free slot of station `k` and removes it
    /// from the queue.
    fn dispatch(&mut self, k: usize) -> Result<Option<usize>> {
        if self.queues[k].is_empty() {
            return Ok(None);
        }
        let mut entries = self.queue_entries(k);
        let gene_rule = self.rules[k];
        if let Some(rank) = &self.rank {
            entries.sort_by_key(|e| (rank[self.graph.index(e.task)], e.task));
        } else if self.decider.is_some() && self.queues[k].iter().any(|&v| self.processable(v)) {
            let features = features::extract(self, k);
            for (index, &value) in features.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFiniteFeature { index, value });
                }
            }
            let processable: Vec<TaskRef> = self.queues[k]
                .iter()
                .filter(|&&v| self.processable(v))
                .map(|&v| self.graph.refs[v])
                .collect();
            let view = DecisionView {
                time: self.clock,
                station: k,
                features: &features,
                gene_rule,
            };
            let decision = self.decider.as_mut().expect("decider").decide(&view)?;
            sort_queue(decision.rule, &mut entries);
            let applied = self.apply_flip(k, decision.flip, &entries);
            self.decisions.push(DecisionPoint {
                time: self.clock,
                station: k,
                processable,
                features: features.to_vec(),
                rule: decision.rule,
                requested_flip: decision.flip,
                applied_flip: applied,
            });
        } else {
            sort_queue(gene_rule, &mut entries);
        }
        let v = self.graph.index(entries[0].task);
        self.queues[k].retain(|&x| x != v);
        Ok(Some(v))
    }

    fn station_wip(&self, k: usize) -> f64 {
        (0..self.graph.len())
            .filter(|&v| self.status[v] != Status::Done && self.assign[v].station == k)
            .map(|v| self.processing_duration(v))
            .sum()
    }

    fn worker_wip(&self) -> Vec<f64> {
        let mut wip = vec![0.0; self.inst.workers.len()];
        for v in 0..self.graph.len() {
            if self.status[v] == Status::Done {
                continue;
            }
            let a = self.assign[v];
            wip[a.processing_worker] += self.automation(v) * self.processing_duration(v);
            if let (Some(w), false) = (a.setup_worker, self.setup_started[v]) {
                wip[w] += self.base_setup_duration(v);
            }
        }
        wip
    }

    /// Applies a flip to the sorted queue of station `k` and writes it back
    /// into the assignment. Returns the flip that actually took effect.
    fn apply_flip(&mut self, k: usize, flip: Flip, sorted: &[QueueEntry]) -> Flip {
        match flip {
            Flip::Keep => Flip::Keep,
            Flip::Station => {
                let Some(second) = sorted.get(1) else {
                    return Flip::Keep;
                };
                let v = self.graph.index(second.task);
                let stations: BTreeSet<usize> = self.inst.task(second.task).alternatives.iter().map(|a| a.station).collect();
                let target = stations
                    .into_iter()
                    .filter(|&s| s != k)
                    .map(|s| (self.station_wip(s), s))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let Some((_, target)) = target else {
                    return Flip::Keep;
                };
                let wip = self.worker_wip();
                let alt = self.inst.task(second.task).alternative(target).expect("alternative station");
                let least = |ws: &mut dyn Iterator<Item = usize>| {
                    ws.min_by(|&a, &b| wip[a].total_cmp(&wip[b]).then(a.cmp(&b)))
                };
                let setup_worker = if self.inst.needs_setup(target) {
                    match least(&mut alt.setup.iter().map(|w| w.worker)) {
                        Some(w) => Some(w),
                        None => return Flip::Keep,
                    }
                } else {
                    None
                };
                let Some(pw) = least(&mut alt.processing.iter().map(|w| w.worker)) else {
                    return Flip::Keep;
                };
                self.assign[v] = Assignment {
                    station: target,
                    setup_worker,
                    processing_worker: pw,
                };
                self.queues[k].retain(|&x| x != v);
                self.queues[target].push(v);
                Flip::Station
            }
            Flip::Worker => {
                let Some(first) = sorted.first() else {
                    return Flip::Keep;
                };
                let v = self.graph.index(first.task);
                let current = self.assign[v].processing_worker;
                let wip = self.worker_wip();
                let alt = self.inst.task(first.task).alternative(k).expect("assigned station");
                let pick = alt
                    .processing
                    .iter()
                    .map(|w| w.worker)
                    .filter(|&w| w != current)
                    .min_by(|&a, &b| wip[a].total_cmp(&wip[b]).then(a.cmp(&b)));
                match pick {
                    Some(w) => {
                        self.assign[v].processing_worker = w;
                        Flip::Worker
                    }
                    None => Flip::Keep,
                }
            }
        }
    }

    fn finish(self, genome: &Genome) -> Result<SimOutcome> {
        let mut out_genome = genome.clone();
        for v in 0..self.graph.len() {
            out_genome.allocation[self.gene_pos[v]].set_assignment(self.assign[v]);
        }
        let schedule = Schedule { operations: self.ops };
        let ms = makespan(&schedule)?;
        let tt = total_tardiness(&schedule, self.inst);
        let n = self.graph.len();
        let mut flow_times = Vec::with_capacity(n);
        let mut wait_times = Vec::with_capacity(n);
        for v in 0..n {
            let ready = self.queued_at[v].unwrap_or(0.0);
            flow_times.push(self.proc_end[v].unwrap_or(ready) - ready);
            wait_times.push(self.proc_start[v].unwrap_or(ready) - ready);
        }
        let stations = (0..self.inst.stations.len())
            .map(|k| {
                let members: Vec<usize> = (0..n).filter(|&v| self.assign[v].station == k).collect();
                let intervals: Vec<(Time, Time)> = members
                    .iter()
                    .map(|&v| (self.queued_at[v].unwrap_or(0.0), self.proc_end[v].unwrap_or(0.0)))
                    .collect();
                let area = integrate_count(&intervals);
                let completed = members.len();
                let mean_flow = if completed > 0 {
                    members.iter().map(|&v| flow_times[v]).sum::<f64>() / completed as f64
                } else {
                    0.0
                };
                StationStats {
                    station: k,
                    completed,
                    mean_wip: if ms > 0.0 { area / ms } else { 0.0 },
                    throughput: if ms > 0.0 { completed as f64 / ms } else { 0.0 },
                    mean_flow_time: mean_flow,
                }
            })
            .collect();
        Ok(SimOutcome {
            schedule,
            metrics: ScheduleMetrics {
                makespan: ms,
                total_tardiness: tt,
                flow_times,
                wait_times,
                stations,
            },
            decisions: self.decisions,
            trace: self.trace,
            genome: out_genome,
        })
    }
}

/// Integral over time of the number of open half-open intervals.
fn integrate_count(intervals: &[(Time, Time)]) -> f64 {
    let mut events: Vec<(Time, i64)> = Vec::with_capacity(intervals.len() * 2);
    for &(s, e) in intervals {
        events.push((s, 1));
        events.push((e, -1));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut area = 0.0;
    let mut level = 0i64;
    let mut last = events.first().map_or(0.0, |e| e.0);
    for (t, d) in events {
        area += level as f64 * (t - last);
        level += d;
        last = t;
    }
    area
}

#[cfg(test)]
mod tests;
