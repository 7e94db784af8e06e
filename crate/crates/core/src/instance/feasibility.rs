use super::{OpKind, Operation, ProblemInstance, Schedule, TaskRef, Time, WORKER_CAPACITY};
use std::collections::BTreeMap;
use std::fmt;

const EPS: f64 = 1e-9;

fn tol(x: f64) -> f64 {
    EPS * x.abs().max(1.0)
}

/// A broken scheduling constraint, tagged with its constraint family.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UnknownTask { task: TaskRef },
    MissingOperation { task: TaskRef, kind: OpKind },
    DuplicateOperation { task: TaskRef, kind: OpKind },
    UnexpectedSetup { task: TaskRef },
    BadInterval { task: TaskRef, kind: OpKind, start: Time, end: Time },
    ReleaseTime { task: TaskRef, start: Time, release: Time },
    Duration { task: TaskRef, kind: OpKind, expected: Time, actual: Time },
    InvalidStation { task: TaskRef, station: usize },
    InvalidWorker { task: TaskRef, kind: OpKind, station: usize, worker: usize },
    StationMismatch { task: TaskRef, setup_station: usize, processing_station: usize },
    WorkerCapacity { worker: usize, time: Time, load: f64 },
    StationCapacity { station: usize, time: Time, active: usize, slots: usize },
    SetupBeforeProcessing { task: TaskRef, setup_end: Time, processing_start: Time },
    TaskOrder { task: TaskRef, start: Time, predecessor_end: Time },
    JobPrecedence { before: usize, after: usize, start: Time, predecessor_end: Time },
    SetupAdjacency { task: TaskRef, intruder: TaskRef },
}

impl Violation {
    /// Name of the constraint family the violation belongs to.
    pub fn family(&self) -> &'static str {
        use Violation::*;
        match self {
            UnknownTask { .. } | MissingOperation { .. } | DuplicateOperation { .. } | UnexpectedSetup { .. } => {
                "structure"
            }
            BadInterval { .. } => "time-domain",
            ReleaseTime { .. } => "release-time",
            Duration { .. } => "duration",
            InvalidStation { .. } | InvalidWorker { .. } | StationMismatch { .. } => "assignment",
            WorkerCapacity { .. } => "worker-capacity",
            StationCapacity { .. } => "station-capacity",
            SetupBeforeProcessing { .. } => "setup-before-processing",
            TaskOrder { .. } => "task-order",
            JobPrecedence { .. } => "job-precedence",
            SetupAdjacency { .. } => "setup-adjacency",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        write!(f, "[{}] ", self.family())?;
        match self {
            UnknownTask { task } => write!(f, "operation for unknown task {task}"),
            MissingOperation { task, kind } => write!(f, "missing {kind} operation of task {task}"),
            DuplicateOperation { task, kind } => write!(f, "duplicate {kind} operation of task {task}"),
            UnexpectedSetup { task } => write!(f, "task {task} has a setup on a station without setups"),
            BadInterval { task, kind, start, end } => {
                write!(f, "{kind} of task {task} has invalid interval [{start}, {end}]")
            }
            ReleaseTime { task, start, release } => {
                write!(f, "task {task} starts processing at {start} before its release {release}")
            }
            Duration { task, kind, expected, actual } => {
                write!(f, "{kind} of task {task} lasts {actual}, expected {expected}")
            }
            InvalidStation { task, station } => write!(f, "task {task} cannot run on station {station}"),
            InvalidWorker { task, kind, station, worker } => {
                write!(f, "worker {worker} cannot do the {kind} of task {task} on station {station}")
            }
            StationMismatch { task, setup_station, processing_station } => write!(
                f,
                "task {task} is set up on station {setup_station} but processed on {processing_station}"
            ),
            WorkerCapacity { worker, time, load } => {
                write!(f, "worker {worker} is loaded {load} > 1 at time {time}")
            }
            StationCapacity { station, time, active, slots } => {
                write!(f, "station {station} runs {active} tasks with {slots} slots at time {time}")
            }
            SetupBeforeProcessing { task, setup_end, processing_start } => write!(
                f,
                "task {task} starts processing at {processing_start} before its setup ends at {setup_end}"
            ),
            TaskOrder { task, start, predecessor_end } => write!(
                f,
                "task {task} starts at {start} before its job predecessor ends at {predecessor_end}"
            ),
            JobPrecedence { before, after, start, predecessor_end } => write!(
                f,
                "job {after} starts at {start} before predecessor job {before} ends at {predecessor_end}"
            ),
            SetupAdjacency { task, intruder } => {
                write!(f, "task {intruder} is interleaved between setup and processing of task {task}")
            }
        }
    }
}

/// Checks a decoded schedule against every constraint family of the model.
/// An empty result means the schedule is feasible.
pub fn check_schedule_feasibility(instance: &ProblemInstance, schedule: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index: BTreeMap<(TaskRef, OpKind), usize> = BTreeMap::new();
    for (i, op) in schedule.operations.iter().enumerate() {
        if instance.try_task(op.task).is_none() {
            out.push(Violation::UnknownTask { task: op.task });
            continue;
        }
        if index.insert((op.task, op.kind), i).is_some() {
            out.push(Violation::DuplicateOperation {
                task: op.task,
                kind: op.kind,
            });
        }
        if !(op.start.is_finite() && op.end.is_finite() && op.start >= -tol(op.start) && op.end >= op.start - tol(op.end)) {
            out.push(Violation::BadInterval {
                task: op.task,
                kind: op.kind,
                start: op.start,
                end: op.end,
            });
        }
    }
    let get = |t: TaskRef, k: OpKind| index.get(&(t, k)).map(|&i| &schedule.operations[i]);

    // per-operation attention load; ops on invalid stations carry none
    let mut load: Vec<Option<f64>> = vec![None; schedule.operations.len()];
    // per-station occupancy intervals
    let mut occupancy: BTreeMap<usize, Vec<(Time, Time, TaskRef)>> = BTreeMap::new();

    for t in instance.tasks() {
        let spec = instance.task(t);
        let Some(proc) = get(t, OpKind::Processing) else {
            out.push(Violation::MissingOperation {
                task: t,
                kind: OpKind::Processing,
            });
            continue;
        };
        let setup = get(t, OpKind::Setup);
        let Some(alt) = spec.alternative(proc.station).filter(|_| proc.station < instance.stations.len()) else {
            out.push(Violation::InvalidStation {
                task: t,
                station: proc.station,
            });
            continue;
        };
        let station = &instance.stations[proc.station];

        if proc.start < spec.release - tol(spec.release) {
            out.push(Violation::ReleaseTime {
                task: t,
                start: proc.start,
                release: spec.release,
            });
        }
        match alt.processing_duration(proc.worker) {
            None => out.push(Violation::InvalidWorker {
                task: t,
                kind: OpKind::Processing,
                station: proc.station,
                worker: proc.worker,
            }),
            Some(d) => {
                let actual = proc.end - proc.start;
                if (actual - d).abs() > tol(d) {
                    out.push(Violation::Duration {
                        task: t,
                        kind: OpKind::Processing,
                        expected: d,
                        actual,
                    });
                }
            }
        }
        load[index[&(t, OpKind::Processing)]] = Some(alt.automation);

        let mut occ_start = proc.start;
        match (station.requires_setup, setup) {
            (true, None) => out.push(Violation::MissingOperation {
                task: t,
                kind: OpKind::Setup,
            }),
            (false, Some(_)) => out.push(Violation::UnexpectedSetup { task: t }),
            (false, None) => {}
            (true, Some(su)) => {
                if su.station != proc.station {
                    out.push(Violation::StationMismatch {
                        task: t,
                        setup_station: su.station,
                        processing_station: proc.station,
                    });
                } else if alt.setup_duration(su.worker).is_none() {
                    out.push(Violation::InvalidWorker {
                        task: t,
                        kind: OpKind::Setup,
                        station: su.station,
                        worker: su.worker,
                    });
                }
                if proc.start < su.end - tol(su.end) {
                    out.push(Violation::SetupBeforeProcessing {
                        task: t,
                        setup_end: su.end,
                        processing_start: proc.start,
                    });
                }
                load[index[&(t, OpKind::Setup)]] = Some(1.0);
                occ_start = occ_start.min(su.start);
            }
        }
        occupancy
            .entry(proc.station)
            .or_default()
            .push((occ_start, proc.end, t));

        if t.task > 0 {
            if let Some(prev) = get(TaskRef::new(t.job, t.task - 1), OpKind::Processing) {
                if proc.start < prev.end - tol(prev.end) {
                    out.push(Violation::TaskOrder {
                        task: t,
                        start: proc.start,
                        predecessor_end: prev.end,
                    });
                }
            }
        }
    }

    check_setup_durations(instance, schedule, &mut out);

    for e in &instance.job_precedence {
        let (Some(bj), Some(aj)) = (instance.jobs.get(e.before), instance.jobs.get(e.after)) else {
            continue;
        };
        if bj.tasks.is_empty() || aj.tasks.is_empty() {
            continue;
        }
        let last = get(instance.last_task(e.before), OpKind::Processing);
        let first = get(TaskRef::new(e.after, 0), OpKind::Processing);
        if let (Some(last), Some(first)) = (last, first) {
            if first.start < last.end - tol(last.end) {
                out.push(Violation::JobPrecedence {
                    before: e.before,
                    after: e.after,
                    start: first.start,
                    predecessor_end: last.end,
                });
            }
        }
    }

    // worker attention
    let mut by_worker: BTreeMap<usize, Vec<(Time, Time, f64)>> = BTreeMap::new();
    for (op, l) in schedule.operations.iter().zip(&load) {
        if let Some(l) = *l {
            by_worker.entry(op.worker).or_default().push((op.start, op.end, l));
        }
    }
    for (worker, intervals) in by_worker {
        if let Some((time, peak)) = first_overload(&intervals, WORKER_CAPACITY) {
            out.push(Violation::WorkerCapacity {
                worker,
                time,
                load: peak,
            });
        }
    }

    // station slots, with each task occupying a slot from setup start to
    // processing end
    for (&station, intervals) in &occupancy {
        let slots = instance.stations[station].slots;
        let weighted: Vec<(Time, Time, f64)> = intervals.iter().map(|&(s, e, _)| (s, e, 1.0)).collect();
        if let Some((time, peak)) = first_overload(&weighted, slots as f64) {
            out.push(Violation::StationCapacity {
                station,
                time,
                active: peak.round() as usize,
                slots,
            });
        }
        if slots == 1 && instance.stations[station].requires_setup {
            check_adjacency(schedule, station, &get, intervals, &mut out);
        }
    }

    out
}

/// Sweeps half-open intervals and returns the first instant the summed
/// weight exceeds `cap`. Zero-length intervals carry no load.
fn first_overload(intervals: &[(Time, Time, f64)], cap: f64) -> Option<(Time, f64)> {
    let mut events: Vec<(Time, f64)> = Vec::with_capacity(intervals.len() * 2);
    for &(s, e, w) in intervals {
        if e - s > tol(e) {
            events.push((s, w));
            events.push((e, -w));
        }
    }
    // ends before starts at equal times
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut level = 0.0;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        while i < events.len() && (events[i].0 - t).abs() <= tol(t) {
            level += events[i].1;
            i += 1;
        }
        if level > cap + 1e-9 {
            return Some((t, level));
        }
    }
    None
}

/// Recomputes every setup duration from the station's setup sequence
/// (ordered by start, ties by schedule order).
fn check_setup_durations(instance: &ProblemInstance, schedule: &Schedule, out: &mut Vec<Violation>) {
    let mut per_station: BTreeMap<usize, Vec<(usize, &Operation)>> = BTreeMap::new();
    for (i, op) in schedule.operations.iter().enumerate() {
        if op.kind == OpKind::Setup && op.station < instance.stations.len() && instance.try_task(op.task).is_some() {
            per_station.entry(op.station).or_default().push((i, op));
        }
    }
    for (station, mut ops) in per_station {
        ops.sort_by(|a, b| a.1.start.total_cmp(&b.1.start).then(a.0.cmp(&b.0)));
        let mut prev: Option<TaskRef> = None;
        for (_, op) in ops {
            let Some(alt) = instance.task(op.task).alternative(station) else {
                continue;
            };
            if let Some(d) = alt.setup_duration(op.worker) {
                let factor = instance.stations[station].sequence_factor(prev, op.task);
                let expected = d * (1.0 + factor);
                let actual = op.end - op.start;
                if (actual - expected).abs() > tol(expected) {
                    out.push(Violation::Duration {
                        task: op.task,
                        kind: OpKind::Setup,
                        expected,
                        actual,
                    });
                }
            }
            prev = Some(op.task);
        }
    }
}

fn check_adjacency<'a>(
    schedule: &'a Schedule,
    station: usize,
    get: &impl Fn(TaskRef, OpKind) -> Option<&'a Operation>,
    intervals: &[(Time, Time, TaskRef)],
    out: &mut Vec<Violation>,
) {
    for &(_, _, t) in intervals {
        let (Some(su), Some(pr)) = (get(t, OpKind::Setup), get(t, OpKind::Processing)) else {
            continue;
        };
        let intruder = schedule.operations.iter().find(|o| {
            if o.task == t || o.station != station {
                return false;
            }
            let inside_gap = o.start < pr.start - tol(pr.start) && o.end > su.end + tol(su.end);
            let point_inside = (o.end - o.start).abs() <= tol(o.end)
                && o.start > su.end + tol(su.end)
                && o.start < pr.start - tol(pr.start);
            inside_gap || point_inside
        });
        if let Some(o) = intruder {
            out.push(Violation::SetupAdjacency {
                task: t,
                intruder: o.task,
            });
        }
    }
}
