use super::{ProblemInstance, TaskRef};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Flat view of the task DAG: chain edges inside each job plus an edge from
/// the last task of every predecessor job to the first task of its successor.
#[derive(Clone, Debug)]
pub struct TaskGraph {
    pub refs: Vec<TaskRef>,
    offsets: Vec<usize>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
}

impl TaskGraph {
    pub fn new(instance: &ProblemInstance) -> Self {
        let refs: Vec<TaskRef> = instance.tasks().collect();
        let mut offsets = Vec::with_capacity(instance.jobs.len() + 1);
        let mut acc = 0;
        for job in &instance.jobs {
            offsets.push(acc);
            acc += job.tasks.len();
        }
        offsets.push(acc);

        let n = refs.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let link = |a: usize, b: usize, preds: &mut Vec<Vec<usize>>, succs: &mut Vec<Vec<usize>>| {
            if !succs[a].contains(&b) {
                succs[a].push(b);
                preds[b].push(a);
            }
        };
        for (j, job) in instance.jobs.iter().enumerate() {
            for t in 1..job.tasks.len() {
                link(offsets[j] + t - 1, offsets[j] + t, &mut preds, &mut succs);
            }
        }
        for e in &instance.job_precedence {
            let (Some(bj), Some(aj)) = (instance.jobs.get(e.before), instance.jobs.get(e.after)) else {
                continue;
            };
            if bj.tasks.is_empty() || aj.tasks.is_empty() {
                continue;
            }
            let last = offsets[e.before] + bj.tasks.len() - 1;
            let first = offsets[e.after];
            link(last, first, &mut preds, &mut succs);
        }
        for v in preds.iter_mut().chain(succs.iter_mut()) {
            v.sort_unstable();
        }
        Self {
            refs,
            offsets,
            preds,
            succs,
        }
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn index(&self, t: TaskRef) -> usize {
        self.offsets[t.job] + t.task
    }

    pub fn job_range(&self, job: usize) -> std::ops::Range<usize> {
        self.offsets[job]..self.offsets[job + 1]
    }

    /// Layer index (1-based) of every task, computed by repeatedly peeling
    /// off the vertices whose predecessors have all been visited.
    pub fn layers(&self) -> Result<Vec<usize>> {
        let n = self.len();
        let mut group = vec![0usize; n];
        let mut remaining: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut frontier: Vec<usize> = (0..n).filter(|&v| remaining[v] == 0).collect();
        let mut layer = 1;
        let mut visited = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &v in &frontier {
                group[v] = layer;
                visited += 1;
            }
            for &v in &frontier {
                for &s in &self.succs[v] {
                    remaining[s] -= 1;
                    if remaining[s] == 0 {
                        next.push(s);
                    }
                }
            }
            next.sort_unstable();
            frontier = next;
            layer += 1;
        }
        if visited < n {
            let stuck = (0..n).find(|&v| group[v] == 0).expect("unvisited vertex");
            return Err(Error::Cycle(self.refs[stuck]));
        }
        Ok(group)
    }
}

/// Topology group of every task in the instance's task DAG.
pub fn topology_groups(instance: &ProblemInstance) -> Result<BTreeMap<TaskRef, usize>> {
    let graph = TaskGraph::new(instance);
    let groups = graph.layers()?;
    Ok(graph.refs.iter().copied().zip(groups).collect())
}
