//! Problem data model for the dual-resource-constrained flexible job shop.
//!
//! A job is an ordered chain of tasks; jobs are linked by precedence edges
//! into a DAG (bill-of-material structure). Each task is executed on one of
//! several alternative stations and needs a capable worker for its
//! processing operation and, on stations that require it, for a setup
//! operation as well.

mod feasibility;
mod graph;
mod objective;
mod validate;

pub use feasibility::{check_schedule_feasibility, Violation};
pub use graph::{topology_groups, TaskGraph};
pub use objective::{
    makespan, scalarize, total_tardiness, Baseline, ScheduleMetrics, StationStats,
};
pub use validate::{validate_instance, InstanceIssue, ValidationReport};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Abstract, continuous time unit.
pub type Time = f64;

/// Lower and upper bound of a sequence-dependency factor.
pub const SEQUENCE_FACTOR_RANGE: (f64, f64) = (-1.0, 0.5);

/// Attention a worker can spend at any instant.
pub const WORKER_CAPACITY: f64 = 1.0;

/// Identifies a task by its job index and its position inside the job.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct TaskRef {
    pub job: usize,
    pub task: usize,
}

impl TaskRef {
    pub const fn new(job: usize, task: usize) -> Self {
        Self { job, task }
    }
}

impl fmt::Display for TaskRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.job, self.task)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Setup,
    Processing,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Setup => "setup",
            OpKind::Processing => "processing",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerDuration {
    pub worker: usize,
    pub duration: Time,
}

/// One station a task may run on, with the capable workers and their
/// durations for the setup and the processing operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskAlternative {
    pub station: usize,
    /// Share of a worker's attention the processing operation occupies.
    pub automation: f64,
    #[serde(default)]
    pub setup: Vec<WorkerDuration>,
    pub processing: Vec<WorkerDuration>,
}

impl TaskAlternative {
    pub fn setup_duration(&self, worker: usize) -> Option<Time> {
        self.setup
            .iter()
            .find(|w| w.worker == worker)
            .map(|w| w.duration)
    }

    pub fn processing_duration(&self, worker: usize) -> Option<Time> {
        self.processing
            .iter()
            .find(|w| w.worker == worker)
            .map(|w| w.duration)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Material arrival; binds the processing operation only.
    #[serde(default)]
    pub release: Time,
    pub alternatives: Vec<TaskAlternative>,
}

impl TaskSpec {
    pub fn alternative(&self, station: usize) -> Option<&TaskAlternative> {
        self.alternatives.iter().find(|a| a.station == station)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    #[serde(default)]
    pub name: String,
    pub tasks: Vec<TaskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub due_date: Option<Time>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Station {
    #[serde(default)]
    pub name: String,
    pub slots: usize,
    pub requires_setup: bool,
    /// Setup scaling when `.0` is directly followed by `.1` on this station.
    /// Missing pairs are neutral.
    #[serde(default, with = "factor_list")]
    pub sequence_factors: BTreeMap<(TaskRef, TaskRef), f64>,
}

impl Station {
    pub fn sequence_factor(&self, prev: Option<TaskRef>, next: TaskRef) -> f64 {
        prev.and_then(|p| self.sequence_factors.get(&(p, next)).copied())
            .unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    #[serde(default)]
    pub name: String,
}

/// Job `after` may only start processing once job `before` has finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JobEdge {
    pub before: usize,
    pub after: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub makespan: f64,
    pub tardiness: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            makespan: 0.5,
            tardiness: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub weights: ObjectiveWeights,
    pub jobs: Vec<Job>,
    pub stations: Vec<Station>,
    pub workers: Vec<Worker>,
    #[serde(default)]
    pub job_precedence: Vec<JobEdge>,
}

impl ProblemInstance {
    pub fn task(&self, t: TaskRef) -> &TaskSpec {
        &self.jobs[t.job].tasks[t.task]
    }

    pub fn try_task(&self, t: TaskRef) -> Option<&TaskSpec> {
        self.jobs.get(t.job).and_then(|j| j.tasks.get(t.task))
    }

    /// All tasks in (job, task) order.
    pub fn tasks(&self) -> impl Iterator<Item = TaskRef> + '_ {
        self.jobs
            .iter()
            .enumerate()
            .flat_map(|(j, job)| (0..job.tasks.len()).map(move |t| TaskRef::new(j, t)))
    }

    pub fn task_count(&self) -> usize {
        self.jobs.iter().map(|j| j.tasks.len()).sum()
    }

    pub fn last_task(&self, job: usize) -> TaskRef {
        TaskRef::new(job, self.jobs[job].tasks.len() - 1)
    }

    /// Whether tasks placed on `station` need a setup operation.
    pub fn needs_setup(&self, station: usize) -> bool {
        self.stations[station].requires_setup
    }

    /// Stable structural hash used to tell genomes of different instances apart.
    pub fn fingerprint(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01B3;
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        eat(self.stations.len() as u64);
        eat(self.workers.len() as u64);
        for job in &self.jobs {
            eat(job.tasks.len() as u64);
            for task in &job.tasks {
                for alt in &task.alternatives {
                    eat(alt.station as u64);
                    eat(alt.processing.len() as u64);
                    eat(alt.setup.len() as u64);
                }
            }
        }
        for e in &self.job_precedence {
            eat(e.before as u64);
            eat(e.after as u64);
        }
        h
    }
}

/// One realized setup or processing operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub task: TaskRef,
    pub kind: OpKind,
    pub station: usize,
    pub worker: usize,
    pub start: Time,
    pub end: Time,
}

/// Decoded schedule. Operations are kept in the order they were started;
/// ties in start time on a station are resolved by this order when the
/// station's setup sequence is reconstructed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub operations: Vec<Operation>,
}

impl Schedule {
    pub fn find(&self, task: TaskRef, kind: OpKind) -> Option<&Operation> {
        self.operations
            .iter()
            .find(|o| o.task == task && o.kind == kind)
    }

    /// Completion time of the job's last processing operation.
    pub fn job_completion(&self, instance: &ProblemInstance, job: usize) -> Option<Time> {
        self.find(instance.last_task(job), OpKind::Processing)
            .map(|o| o.end)
    }

    /// Tardiness per job; `None` for jobs without a due date.
    pub fn tardiness(&self, instance: &ProblemInstance) -> Vec<Option<Time>> {
        instance
            .jobs
            .iter()
            .enumerate()
            .map(|(i, job)| {
                let due = job.due_date?;
                let done = self.job_completion(instance, i)?;
                Some((done - due).max(0.0))
            })
            .collect()
    }
}

mod factor_list {
    use super::TaskRef;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        from: TaskRef,
        to: TaskRef,
        factor: f64,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(TaskRef, TaskRef), f64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|(&(from, to), &factor)| Entry { from, to, factor })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(TaskRef, TaskRef), f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|e| ((e.from, e.to), e.factor))
            .collect())
    }
}
