use crate::error::{Error, Result};
use crate::genome::DispatchRule;
use crate::instance::{ProblemInstance, TaskRef, Time};
use std::cmp::Ordering;

/// What the dispatching rules need to know about a queued task.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueueEntry {
    pub task: TaskRef,
    /// Processing duration with the assigned worker.
    pub processing: Time,
    /// Processing work left in the task's job, this task included.
    pub remaining_work: Time,
    /// Due date minus clock minus remaining work; `None` without a due date.
    pub slack: Option<Time>,
    /// When the task entered the queue.
    pub arrival: Time,
}

fn slack_order(a: Option<Time>, b: Option<Time>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Sorts a queue by priority, highest first. Ties fall back to (job, task).
pub fn sort_queue(rule: DispatchRule, queue: &mut [QueueEntry]) {
    queue.sort_by(|a, b| {
        let primary = match rule {
            DispatchRule::Spt => a.processing.total_cmp(&b.processing),
            DispatchRule::Lpt => b.processing.total_cmp(&a.processing),
            DispatchRule::Mtwr => b.remaining_work.total_cmp(&a.remaining_work),
            DispatchRule::Str => slack_order(a.slack, b.slack),
            DispatchRule::Fifo => a.arrival.total_cmp(&b.arrival),
        };
        primary.then(a.task.cmp(&b.task))
    });
}

/// Setup duration of `task` on `station` by `worker`, scaled by the
/// sequence factor of the station's previous setup. The first setup on a
/// station takes the raw duration.
pub fn setup_duration(
    instance: &ProblemInstance,
    prev: Option<TaskRef>,
    task: TaskRef,
    station: usize,
    worker: usize,
) -> Result<Time> {
    let invalid = || Error::InvalidAssignment {
        task,
        station,
        worker,
        kind: "setup",
    };
    let alt = instance
        .try_task(task)
        .and_then(|t| t.alternative(station))
        .ok_or_else(invalid)?;
    let d = alt.setup_duration(worker).ok_or_else(invalid)?;
    let s = instance.stations[station].sequence_factor(prev, task);
    Ok((d * (1.0 + s)).max(0.0))
}
