//! Two-part value encoding of a solution: a resource-allocation subgenome
//! with one gene per task and a dispatching subgenome with one rule per
//! station.

pub(crate) mod operators;

pub use operators::{init_population, jox_crossover, jox_with_selection, mutate, Move};

use crate::error::{Error, Result};
use crate::instance::{topology_groups, ProblemInstance, TaskRef};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispatchRule {
    /// Shortest processing time first.
    Spt,
    /// Longest processing time first.
    Lpt,
    /// Most total work remaining in the job first.
    Mtwr,
    /// Smallest slack first.
    Str,
    /// Order of arrival in the queue.
    Fifo,
}

impl DispatchRule {
    pub const ALL: [DispatchRule; 5] = [Self::Spt, Self::Lpt, Self::Mtwr, Self::Str, Self::Fifo];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Spt => "spt",
            Self::Lpt => "lpt",
            Self::Mtwr => "mtwr",
            Self::Str => "str",
            Self::Fifo => "fifo",
        }
    }
}

impl fmt::Display for DispatchRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DispatchRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown dispatching rule `{s}`")))
    }
}

/// Station and workers chosen for one task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    pub station: usize,
    /// `None` on stations without setups.
    pub setup_worker: Option<usize>,
    pub processing_worker: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationGene {
    pub task: TaskRef,
    pub group: usize,
    pub station: usize,
    pub setup_worker: Option<usize>,
    pub processing_worker: usize,
}

impl AllocationGene {
    pub fn assignment(&self) -> Assignment {
        Assignment {
            station: self.station,
            setup_worker: self.setup_worker,
            processing_worker: self.processing_worker,
        }
    }

    pub fn set_assignment(&mut self, a: Assignment) {
        self.station = a.station;
        self.setup_worker = a.setup_worker;
        self.processing_worker = a.processing_worker;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchGene {
    pub station: usize,
    pub rule: DispatchRule,
}

/// Allocation genes are kept in canonical order (topology group, job, task),
/// so gene positions mean the same task in every genome of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genome {
    pub fingerprint: u64,
    pub allocation: Vec<AllocationGene>,
    pub dispatching: Vec<DispatchGene>,
}

/// Tasks of the instance in canonical gene order with their groups.
pub fn canonical_order(instance: &ProblemInstance) -> Result<Vec<(TaskRef, usize)>> {
    let groups = topology_groups(instance)?;
    let mut order: Vec<(TaskRef, usize)> = groups.into_iter().collect();
    order.sort_by_key(|&(t, g)| (g, t));
    Ok(order)
}

/// Every valid (station, setup worker, processing worker) combination of a task.
pub fn task_assignments(instance: &ProblemInstance, task: TaskRef) -> Vec<Assignment> {
    let mut out = Vec::new();
    for alt in &instance.task(task).alternatives {
        let setups: Vec<Option<usize>> = if instance.needs_setup(alt.station) {
            alt.setup.iter().map(|w| Some(w.worker)).collect()
        } else {
            vec![None]
        };
        for &sw in &setups {
            for pw in &alt.processing {
                out.push(Assignment {
                    station: alt.station,
                    setup_worker: sw,
                    processing_worker: pw.worker,
                });
            }
        }
    }
    out
}

impl Genome {
    /// Builds a genome from assignments given in canonical gene order.
    pub fn from_assignments(
        instance: &ProblemInstance,
        assignments: &[Assignment],
        rules: &[DispatchRule],
    ) -> Result<Self> {
        let order = canonical_order(instance)?;
        if assignments.len() != order.len() || rules.len() != instance.stations.len() {
            return Err(Error::InvalidGenome(format!(
                "expected {} assignments and {} rules",
                order.len(),
                instance.stations.len()
            )));
        }
        let allocation = order
            .iter()
            .zip(assignments)
            .map(|(&(task, group), a)| AllocationGene {
                task,
                group,
                station: a.station,
                setup_worker: a.setup_worker,
                processing_worker: a.processing_worker,
            })
            .collect();
        let dispatching = rules
            .iter()
            .enumerate()
            .map(|(station, &rule)| DispatchGene { station, rule })
            .collect();
        let g = Self {
            fingerprint: instance.fingerprint(),
            allocation,
            dispatching,
        };
        g.validate(instance)?;
        Ok(g)
    }

    pub fn gene(&self, task: TaskRef) -> Option<&AllocationGene> {
        self.allocation.iter().find(|g| g.task == task)
    }

    pub fn gene_mut(&mut self, task: TaskRef) -> Option<&mut AllocationGene> {
        self.allocation.iter_mut().find(|g| g.task == task)
    }

    pub fn rule(&self, station: usize) -> DispatchRule {
        self.dispatching[station].rule
    }

    /// Checks every structural invariant against the instance.
    pub fn validate(&self, instance: &ProblemInstance) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGenome(m));
        if self.fingerprint != instance.fingerprint() {
            return Err(Error::InstanceMismatch);
        }
        let order = canonical_order(instance)?;
        if self.allocation.len() != order.len() {
            return bad(format!("{} allocation genes for {} tasks", self.allocation.len(), order.len()));
        }
        for (gene, &(task, group)) in self.allocation.iter().zip(&order) {
            if gene.task != task || gene.group != group {
                return bad(format!("gene for task {} out of canonical position", gene.task));
            }
            let Some(alt) = instance.task(task).alternative(gene.station) else {
                return bad(format!("task {task} cannot use station {}", gene.station));
            };
            if alt.processing_duration(gene.processing_worker).is_none() {
                return Err(Error::InvalidAssignment {
                    task,
                    station: gene.station,
                    worker: gene.processing_worker,
                    kind: "processing",
                });
            }
            match (instance.needs_setup(gene.station), gene.setup_worker) {
                (true, Some(w)) if alt.setup_duration(w).is_some() => {}
                (true, Some(w)) => {
                    return Err(Error::InvalidAssignment {
                        task,
                        station: gene.station,
                        worker: w,
                        kind: "setup",
                    })
                }
                (true, None) => return bad(format!("task {task} lacks a setup worker")),
                (false, Some(_)) => return bad(format!("task {task} has a setup worker on a station without setups")),
                (false, None) => {}
            }
        }
        if self.dispatching.len() != instance.stations.len()
            || self.dispatching.iter().enumerate().any(|(k, g)| g.station != k)
        {
            return bad("dispatching subgenome must hold one gene per station in order".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;

    #[test]
    fn rules_parse_case_insensitively() {
        assert_eq!("STR".parse::<DispatchRule>().unwrap(), DispatchRule::Str);
        assert!("edd".parse::<DispatchRule>().is_err());
    }

    #[test]
    fn assignments_cover_all_worker_pairs() {
        let inst = instance(
            vec![job(
                vec![task(
                    0.0,
                    vec![alt(0, &[(0, 1.0), (1, 1.0)], &[(0, 2.0)]), alt(1, &[], &[(0, 2.0), (1, 3.0)])],
                )],
                None,
            )],
            vec![station(1, true), station(1, false)],
            2,
        );
        let all = task_assignments(&inst, TaskRef::new(0, 0));
        assert_eq!(all.len(), 4);
        assert!(all.iter().filter(|a| a.station == 1).all(|a| a.setup_worker.is_none()));
    }

    #[test]
    fn validation_catches_bad_worker() {
        let inst = single_task(0.0);
        let a = Assignment {
            station: 0,
            setup_worker: Some(0),
            processing_worker: 0,
        };
        let mut g = Genome::from_assignments(&inst, &[a], &[DispatchRule::Spt]).unwrap();
        g.allocation[0].processing_worker = 3;
        assert!(matches!(g.validate(&inst), Err(Error::InvalidAssignment { .. })));
    }
}
