use super::{ProblemInstance, TaskRef, SEQUENCE_FACTOR_RANGE};
use crate::instance::graph::TaskGraph;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceIssue {
    NoJobs,
    NoStations,
    NoWorkers,
    Weights { makespan: f64, tardiness: f64 },
    EmptyJob { job: usize },
    CyclicJobPrecedence { job: usize },
    BadJobEdge { before: usize, after: usize },
    DueDateOnPredecessor { job: usize },
    BadDueDate { job: usize, value: f64 },
    BadRelease { task: TaskRef, value: f64 },
    NoAlternatives { task: TaskRef },
    UnknownStation { task: TaskRef, station: usize },
    DuplicateStation { task: TaskRef, station: usize },
    UnknownWorker { task: TaskRef, worker: usize },
    NoProcessingWorkers { task: TaskRef, station: usize },
    NoSetupWorkers { task: TaskRef, station: usize },
    BadDuration { task: TaskRef, station: usize, worker: usize, value: f64 },
    AutomationOutOfRange { task: TaskRef, station: usize, value: f64 },
    NoSlots { station: usize },
    FactorOutOfRange { station: usize, from: TaskRef, to: TaskRef, value: f64 },
    FactorUnknownTask { station: usize, task: TaskRef },
}

impl fmt::Display for InstanceIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InstanceIssue::*;
        match self {
            NoJobs => write!(f, "instance has no jobs"),
            NoStations => write!(f, "instance has no stations"),
            NoWorkers => write!(f, "instance has no workers"),
            Weights { makespan, tardiness } => write!(
                f,
                "objective weights ({makespan}, {tardiness}) must lie in [0, 1] and sum to 1"
            ),
            EmptyJob { job } => write!(f, "job {job} has no tasks"),
            CyclicJobPrecedence { job } => write!(f, "cyclic job precedence through job {job}"),
            BadJobEdge { before, after } => write!(f, "job precedence edge {before} -> {after} is invalid"),
            DueDateOnPredecessor { job } => {
                write!(f, "job {job} has a due date but also a successor job")
            }
            BadDueDate { job, value } => write!(f, "job {job} due date {value} is not a finite time"),
            BadRelease { task, value } => write!(f, "task {task} release {value} is not a finite non-negative time"),
            NoAlternatives { task } => write!(f, "task {task} has no alternative station"),
            UnknownStation { task, station } => write!(f, "task {task} references unknown station {station}"),
            DuplicateStation { task, station } => write!(f, "task {task} lists station {station} twice"),
            UnknownWorker { task, worker } => write!(f, "task {task} references unknown worker {worker}"),
            NoProcessingWorkers { task, station } => {
                write!(f, "task {task} has no processing worker on station {station}")
            }
            NoSetupWorkers { task, station } => {
                write!(f, "task {task} has no setup worker on station {station}")
            }
            BadDuration { task, station, worker, value } => write!(
                f,
                "task {task} duration {value} on station {station} by worker {worker} must be positive"
            ),
            AutomationOutOfRange { task, station, value } => write!(
                f,
                "task {task} automation degree {value} on station {station} out of [0, 1]"
            ),
            NoSlots { station } => write!(f, "station {station} has no slots"),
            FactorOutOfRange { station, from, to, value } => write!(
                f,
                "station {station} factor {from} -> {to} = {value} out of [{}, {}]",
                SEQUENCE_FACTOR_RANGE.0, SEQUENCE_FACTOR_RANGE.1
            ),
            FactorUnknownTask { station, task } => {
                write!(f, "station {station} factor references unknown task {task}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<InstanceIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

pub fn validate_instance(instance: &ProblemInstance) -> ValidationReport {
    let mut issues = Vec::new();
    let n_st = instance.stations.len();
    let n_wk = instance.workers.len();
    if instance.jobs.is_empty() {
        issues.push(InstanceIssue::NoJobs);
    }
    if n_st == 0 {
        issues.push(InstanceIssue::NoStations);
    }
    if n_wk == 0 {
        issues.push(InstanceIssue::NoWorkers);
    }
    let w = instance.weights;
    let in_unit = |x: f64| (0.0..=1.0).contains(&x);
    if !in_unit(w.makespan) || !in_unit(w.tardiness) || (w.makespan + w.tardiness - 1.0).abs() > 1e-9 {
        issues.push(InstanceIssue::Weights {
            makespan: w.makespan,
            tardiness: w.tardiness,
        });
    }

    let n_jobs = instance.jobs.len();
    let mut has_successor = vec![false; n_jobs];
    let mut edges_ok = true;
    for e in &instance.job_precedence {
        if e.before >= n_jobs || e.after >= n_jobs || e.before == e.after {
            issues.push(InstanceIssue::BadJobEdge {
                before: e.before,
                after: e.after,
            });
            edges_ok = false;
        } else {
            has_successor[e.before] = true;
        }
    }

    for (j, job) in instance.jobs.iter().enumerate() {
        if job.tasks.is_empty() {
            issues.push(InstanceIssue::EmptyJob { job: j });
        }
        if let Some(due) = job.due_date {
            if !due.is_finite() {
                issues.push(InstanceIssue::BadDueDate { job: j, value: due });
            }
            if has_successor[j] {
                issues.push(InstanceIssue::DueDateOnPredecessor { job: j });
            }
        }
        for (t, spec) in job.tasks.iter().enumerate() {
            let tr = TaskRef::new(j, t);
            if !(spec.release.is_finite() && spec.release >= 0.0) {
                issues.push(InstanceIssue::BadRelease {
                    task: tr,
                    value: spec.release,
                });
            }
            if spec.alternatives.is_empty() {
                issues.push(InstanceIssue::NoAlternatives { task: tr });
            }
            let mut seen = BTreeSet::new();
            for alt in &spec.alternatives {
                let k = alt.station;
                if k >= n_st {
                    issues.push(InstanceIssue::UnknownStation { task: tr, station: k });
                    continue;
                }
                if !seen.insert(k) {
                    issues.push(InstanceIssue::DuplicateStation { task: tr, station: k });
                }
                if !(alt.automation.is_finite() && in_unit(alt.automation)) {
                    issues.push(InstanceIssue::AutomationOutOfRange {
                        task: tr,
                        station: k,
                        value: alt.automation,
                    });
                }
                if alt.processing.is_empty() {
                    issues.push(InstanceIssue::NoProcessingWorkers { task: tr, station: k });
                }
                if instance.stations[k].requires_setup && alt.setup.is_empty() {
                    issues.push(InstanceIssue::NoSetupWorkers { task: tr, station: k });
                }
                for wd in alt.setup.iter().chain(&alt.processing) {
                    if wd.worker >= n_wk {
                        issues.push(InstanceIssue::UnknownWorker {
                            task: tr,
                            worker: wd.worker,
                        });
                    }
                    if !(wd.duration.is_finite() && wd.duration > 0.0) {
                        issues.push(InstanceIssue::BadDuration {
                            task: tr,
                            station: k,
                            worker: wd.worker,
                            value: wd.duration,
                        });
                    }
                }
            }
        }
    }

    for (k, st) in instance.stations.iter().enumerate() {
        if st.slots == 0 {
            issues.push(InstanceIssue::NoSlots { station: k });
        }
        for (&(from, to), &value) in &st.sequence_factors {
            for t in [from, to] {
                if instance.try_task(t).is_none() {
                    issues.push(InstanceIssue::FactorUnknownTask { station: k, task: t });
                }
            }
            let (lo, hi) = SEQUENCE_FACTOR_RANGE;
            if !(value.is_finite() && (lo..=hi).contains(&value)) {
                issues.push(InstanceIssue::FactorOutOfRange {
                    station: k,
                    from,
                    to,
                    value,
                });
            }
        }
    }

    if edges_ok && n_jobs > 0 {
        if let Some(job) = job_cycle(instance) {
            issues.push(InstanceIssue::CyclicJobPrecedence { job });
        }
    }
    // the task-level graph can only be cyclic through job edges, which the
    // check above already covers; run it anyway for empty-job corner cases
    if edges_ok && issues.is_empty() {
        if let Err(crate::error::Error::Cycle(t)) = TaskGraph::new(instance).layers() {
            issues.push(InstanceIssue::CyclicJobPrecedence { job: t.job });
        }
    }

    ValidationReport { issues }
}

fn job_cycle(instance: &ProblemInstance) -> Option<usize> {
    let n = instance.jobs.len();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for e in &instance.job_precedence {
        succ[e.before].push(e.after);
        indeg[e.after] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut seen = 0;
    while let Some(j) = stack.pop() {
        seen += 1;
        for &s in &succ[j] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                stack.push(s);
            }
        }
    }
    (seen < n).then(|| (0..n).find(|&j| indeg[j] > 0).unwrap_or(0))
}
