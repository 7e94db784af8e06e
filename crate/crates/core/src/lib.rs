//! Scheduling for flexible job shops constrained by both stations and workers.
//!
//! Candidate solutions are encoded as genomes, decoded by a discrete-event
//! simulator, and improved by genetic, annealing and tabu search. A small
//! actor-critic network can steer dispatching and resource flips while a
//! genome is decoded.

pub mod agent;
pub mod dataio;
pub mod error;
pub mod genome;
pub mod instance;
pub mod rng;
pub mod search;
pub mod sim;

pub use error::{Error, Result};
pub use genome::{DispatchRule, Genome};
pub use instance::{
    check_schedule_feasibility, makespan, scalarize, topology_groups, total_tardiness,
    validate_instance, Baseline, OpKind, Operation, ProblemInstance, Schedule, ScheduleMetrics,
    TaskRef, Time, Violation,
};
