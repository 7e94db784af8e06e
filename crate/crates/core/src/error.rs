use crate::instance::TaskRef;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schedule has no operations")]
    EmptySchedule,

    #[error("baseline makespan must be positive, got {0}")]
    ZeroBaseline(f64),

    #[error("task graph contains a cycle through task {0}")]
    Cycle(TaskRef),

    #[error("task {0} has no alternative station")]
    Unschedulable(TaskRef),

    #[error("instance is invalid: {0}")]
    InvalidInstance(String),

    #[error("genomes belong to different instances")]
    InstanceMismatch,

    #[error("genome does not match instance: {0}")]
    InvalidGenome(String),

    #[error("worker {worker} cannot perform the {kind} of task {task} on station {station}")]
    InvalidAssignment {
        task: TaskRef,
        station: usize,
        worker: usize,
        kind: &'static str,
    },

    #[error("simulation deadlocked with blocked tasks {blocked:?}")]
    Deadlock { blocked: Vec<TaskRef> },

    #[error("feature {index} is not finite ({value})")]
    NonFiniteFeature { index: usize, value: f64 },

    #[error("training diverged at update {update}: non-finite loss")]
    Divergence { update: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("checkpoint version {found} is incompatible with supported version {expected}")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("enumeration size {size} exceeds cap {cap}")]
    EnumerationCap { size: u128, cap: u128 },

    #[error("model size {estimate} variables exceeds cap {cap}")]
    ModelTooLarge { estimate: usize, cap: usize },

    #[error("evaluation budget {budget} is smaller than the population size {population}")]
    BudgetTooSmall { budget: usize, population: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error at `{path}`: {message}")]
    Format { path: String, message: String },

    #[error("no results to report")]
    EmptyResults,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
