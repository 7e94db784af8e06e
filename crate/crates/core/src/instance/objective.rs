use super::{ObjectiveWeights, ProblemInstance, Schedule, Time};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-station logistics figures accumulated by the simulator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StationStats {
    pub station: usize,
    pub completed: usize,
    /// Time-averaged number of ready, unfinished tasks at the station.
    pub mean_wip: f64,
    /// Completed tasks per time unit over the schedule horizon.
    pub throughput: f64,
    pub mean_flow_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    pub makespan: Time,
    pub total_tardiness: Time,
    /// Completion minus readiness, per task in (job, task) order.
    pub flow_times: Vec<Time>,
    /// Processing start minus readiness, per task in (job, task) order.
    pub wait_times: Vec<Time>,
    pub stations: Vec<StationStats>,
}

/// Reference values that make makespan and tardiness commensurable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub makespan: Time,
    pub tardiness: Time,
}

impl From<&ScheduleMetrics> for Baseline {
    fn from(m: &ScheduleMetrics) -> Self {
        Self {
            makespan: m.makespan,
            tardiness: m.total_tardiness,
        }
    }
}

pub fn makespan(schedule: &Schedule) -> Result<Time> {
    schedule
        .operations
        .iter()
        .map(|o| o.end)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))))
        .ok_or(Error::EmptySchedule)
}

/// Sum of `max(0, completion - due)` over jobs that carry a due date.
pub fn total_tardiness(schedule: &Schedule, instance: &ProblemInstance) -> Time {
    schedule.tardiness(instance).into_iter().flatten().sum()
}

/// Weighted sum of makespan and tardiness, each divided by its baseline.
/// The tardiness baseline is floored at one time unit. Lower is better.
pub fn scalarize(metrics: &ScheduleMetrics, baseline: &Baseline, weights: ObjectiveWeights) -> Result<f64> {
    if !(baseline.makespan > 0.0) {
        return Err(Error::ZeroBaseline(baseline.makespan));
    }
    let ms = metrics.makespan / baseline.makespan;
    let tt = metrics.total_tardiness / baseline.tardiness.max(1.0);
    Ok(weights.makespan * ms + weights.tardiness * tt)
}
