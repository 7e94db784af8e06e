use crate::error::{Error, Result};
use crate::instance::{
    validate_instance, Job, JobEdge, ObjectiveWeights, ProblemInstance, Station, TaskAlternative, TaskRef, TaskSpec,
    Time, Worker, WorkerDuration, SEQUENCE_FACTOR_RANGE,
};
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Parameters of the synthetic instance generator. Ranges are inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default)]
    pub name: String,
    pub jobs: usize,
    pub tasks_per_job: (usize, usize),
    /// Exact total task count; tasks are spread randomly over the jobs.
    #[serde(default)]
    pub total_tasks: Option<usize>,
    pub stations: usize,
    pub workers: usize,
    pub slots: (usize, usize),
    /// Share of stations that need a setup before processing.
    pub setup_station_share: f64,
    /// Probability that a station other than the primary one is an alternative.
    pub station_density: f64,
    /// Probability that a worker can operate a given alternative.
    pub capability_density: f64,
    pub setup_duration: (u32, u32),
    pub processing_duration: (u32, u32),
    /// Relative spread of worker-specific durations around the task's base.
    pub worker_spread: f64,
    /// Probability that an ordered task pair on a setup station has a factor.
    pub factor_density: f64,
    pub factor_range: (f64, f64),
    pub automation: (f64, f64),
    /// Due date = critical-path lower bound times this factor.
    pub due_tightness: f64,
    /// Releases are uniform on [0, spread x mean processing duration].
    pub release_spread: f64,
    /// Probability that a job feeds a later job (each job feeds at most one).
    pub precedence_probability: f64,
    /// Restrict successors to the next few jobs, which yields deeper trees.
    #[serde(default)]
    pub successor_window: Option<usize>,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Few resources, deep bill-of-material trees: 6 jobs, 14 tasks, 2 stations, 2 workers.
    pub fn gbrt01(seed: u64) -> Self {
        Self {
            name: "gbrt01".into(),
            jobs: 6,
            tasks_per_job: (1, 4),
            total_tasks: Some(14),
            stations: 2,
            workers: 2,
            slots: (1, 1),
            setup_station_share: 1.0,
            station_density: 0.6,
            capability_density: 0.7,
            setup_duration: (5, 20),
            processing_duration: (20, 80),
            worker_spread: 0.2,
            factor_density: 0.3,
            factor_range: SEQUENCE_FACTOR_RANGE,
            automation: (0.5, 1.0),
            due_tightness: 1.3,
            release_spread: 1.0,
            precedence_probability: 1.0,
            successor_window: Some(2),
            seed,
        }
    }

    /// Flat jobs on many flexible stations: 3 jobs, 10 tasks, 6 stations, 3 workers.
    pub fn gbrt02(seed: u64) -> Self {
        Self {
            name: "gbrt02".into(),
            jobs: 3,
            tasks_per_job: (2, 5),
            total_tasks: Some(10),
            stations: 6,
            workers: 3,
            slots: (1, 2),
            setup_station_share: 0.5,
            station_density: 0.5,
            capability_density: 0.6,
            setup_duration: (5, 20),
            processing_duration: (20, 80),
            worker_spread: 0.2,
            factor_density: 0.3,
            factor_range: SEQUENCE_FACTOR_RANGE,
            automation: (0.3, 1.0),
            due_tightness: 1.3,
            release_spread: 0.0,
            precedence_probability: 0.0,
            successor_window: None,
            seed,
        }
    }

    /// Shape of a large real plant: sparse capabilities, few flexible stations.
    pub fn realworld(seed: u64) -> Self {
        Self {
            name: "realworld".into(),
            jobs: 112,
            tasks_per_job: (1, 5),
            total_tasks: Some(251),
            stations: 20,
            workers: 24,
            slots: (1, 3),
            setup_station_share: 0.6,
            station_density: 0.08,
            capability_density: 0.15,
            setup_duration: (1, 8),
            processing_duration: (2, 30),
            worker_spread: 0.3,
            factor_density: 0.02,
            factor_range: SEQUENCE_FACTOR_RANGE,
            automation: (0.2, 1.0),
            due_tightness: 1.5,
            release_spread: 3.0,
            precedence_probability: 0.6,
            successor_window: Some(6),
            seed,
        }
    }

    /// Mid-sized shop with 60 tasks, used for timing runs.
    pub fn medium(seed: u64) -> Self {
        Self {
            name: "medium".into(),
            jobs: 20,
            tasks_per_job: (1, 5),
            total_tasks: Some(60),
            stations: 8,
            workers: 8,
            slots: (1, 2),
            setup_station_share: 0.6,
            station_density: 0.3,
            capability_density: 0.4,
            setup_duration: (2, 10),
            processing_duration: (5, 40),
            worker_spread: 0.2,
            factor_density: 0.05,
            factor_range: SEQUENCE_FACTOR_RANGE,
            automation: (0.3, 1.0),
            due_tightness: 1.3,
            release_spread: 2.0,
            precedence_probability: 0.5,
            successor_window: Some(4),
            seed,
        }
    }

    /// At most 3 tasks, 2 stations and 2 workers; small enough to enumerate.
    pub fn tiny(seed: u64) -> Self {
        let mut r = rng::substream(seed, &[0x7141]);
        let jobs = r.gen_range(1..=3);
        Self {
            name: "tiny".into(),
            jobs,
            tasks_per_job: (1, 3),
            total_tasks: Some(r.gen_range(jobs..=3)),
            stations: r.gen_range(1..=2),
            workers: r.gen_range(1..=2),
            slots: (1, 1),
            setup_station_share: 0.5,
            station_density: 0.5,
            capability_density: 0.6,
            setup_duration: (1, 5),
            processing_duration: (2, 10),
            worker_spread: 0.3,
            factor_density: 0.5,
            factor_range: SEQUENCE_FACTOR_RANGE,
            automation: (0.5, 1.0),
            due_tightness: 1.2,
            release_spread: 1.0,
            precedence_probability: 0.3,
            successor_window: None,
            seed,
        }
    }

    pub const PRESETS: [&'static str; 5] = ["gbrt01", "gbrt02", "realworld", "medium", "tiny"];

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "gbrt01" => Ok(Self::gbrt01(seed)),
            "gbrt02" => Ok(Self::gbrt02(seed)),
            "realworld" => Ok(Self::realworld(seed)),
            "medium" => Ok(Self::medium(seed)),
            "tiny" => Ok(Self::tiny(seed)),
            _ => Err(Error::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                Self::PRESETS.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.jobs == 0 || self.stations == 0 || self.workers == 0 {
            return fail("jobs, stations and workers must be positive");
        }
        let (lo, hi) = self.tasks_per_job;
        if lo == 0 || lo > hi {
            return fail("tasks_per_job must be a non-empty range starting at 1 or more");
        }
        if let Some(total) = self.total_tasks {
            if total < self.jobs * lo || total > self.jobs * hi {
                return fail("total_tasks cannot be spread over the jobs within tasks_per_job");
            }
        }
        if self.slots.0 == 0 || self.slots.0 > self.slots.1 {
            return fail("slots must be a range starting at 1 or more");
        }
        for (name, d) in [
            ("station_density", self.station_density),
            ("capability_density", self.capability_density),
        ] {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1]")));
            }
        }
        for (name, p) in [
            ("setup_station_share", self.setup_station_share),
            ("factor_density", self.factor_density),
            ("precedence_probability", self.precedence_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.setup_duration.0 == 0
            || self.setup_duration.0 > self.setup_duration.1
            || self.processing_duration.0 == 0
            || self.processing_duration.0 > self.processing_duration.1
        {
            return fail("duration ranges must be non-empty and positive");
        }
        let (flo, fhi) = self.factor_range;
        if flo > fhi || flo < SEQUENCE_FACTOR_RANGE.0 || fhi > SEQUENCE_FACTOR_RANGE.1 {
            return fail("factor_range must lie inside [-1, 0.5]");
        }
        let (alo, ahi) = self.automation;
        if alo > ahi || alo < 0.0 || ahi > 1.0 {
            return fail("automation must be a range inside [0, 1]");
        }
        if !(self.worker_spread >= 0.0 && self.worker_spread < 1.0) {
            return fail("worker_spread must lie in [0, 1)");
        }
        if !(self.due_tightness > 0.0) || !(self.release_spread >= 0.0) {
            return fail("due_tightness must be positive and release_spread non-negative");
        }
        if self.successor_window == Some(0) {
            return fail("successor_window must be positive");
        }
        Ok(())
    }
}

fn task_counts<R: Rng>(cfg: &GeneratorConfig, r: &mut R) -> Vec<usize> {
    let (lo, hi) = cfg.tasks_per_job;
    match cfg.total_tasks {
        None => (0..cfg.jobs).map(|_| r.gen_range(lo..=hi)).collect(),
        Some(total) => {
            let mut counts = vec![lo; cfg.jobs];
            for _ in 0..total - lo * cfg.jobs {
                let open: Vec<usize> = (0..cfg.jobs).filter(|&j| counts[j] < hi).collect();
                counts[*open.choose(r).expect("room checked by validate")] += 1;
            }
            counts
        }
    }
}

fn pick_workers<R: Rng>(cfg: &GeneratorConfig, r: &mut R, base: u32) -> Vec<WorkerDuration> {
    let mut ws: Vec<usize> = (0..cfg.workers).filter(|_| r.gen_bool(cfg.capability_density)).collect();
    if ws.is_empty() {
        ws.push(r.gen_range(0..cfg.workers));
    }
    ws.into_iter()
        .map(|worker| {
            let scale = 1.0 + r.gen_range(-cfg.worker_spread..=cfg.worker_spread);
            WorkerDuration {
                worker,
                duration: (base as f64 * scale).round().max(1.0),
            }
        })
        .collect()
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Draws a random instance. Deterministic for a given config (seed included).
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<ProblemInstance> {
    cfg.validate()?;
    let mut r = rng::from_seed(cfg.seed);
    let counts = task_counts(cfg, &mut r);

    let stations: Vec<Station> = (0..cfg.stations)
        .map(|k| Station {
            name: format!("S{k}"),
            slots: r.gen_range(cfg.slots.0..=cfg.slots.1),
            requires_setup: r.gen_bool(cfg.setup_station_share),
            sequence_factors: BTreeMap::new(),
        })
        .collect();

    // every job feeds at most one later job: an in-forest of assemblies
    let mut job_precedence = Vec::new();
    for j in 0..cfg.jobs.saturating_sub(1) {
        if r.gen_bool(cfg.precedence_probability) {
            let last = match cfg.successor_window {
                Some(w) => (j + w).min(cfg.jobs - 1),
                None => cfg.jobs - 1,
            };
            job_precedence.push(JobEdge {
                before: j,
                after: r.gen_range(j + 1..=last),
            });
        }
    }

    let mut jobs = Vec::with_capacity(cfg.jobs);
    let mut all_proc = Vec::new();
    for (j, &n) in counts.iter().enumerate() {
        let mut tasks = Vec::with_capacity(n);
        for _ in 0..n {
            let primary = r.gen_range(0..cfg.stations);
            let mut chosen: Vec<usize> = (0..cfg.stations)
                .filter(|&k| k == primary || r.gen_bool(cfg.station_density))
                .collect();
            chosen.sort_unstable();
            let base_proc = r.gen_range(cfg.processing_duration.0..=cfg.processing_duration.1);
            let base_setup = r.gen_range(cfg.setup_duration.0..=cfg.setup_duration.1);
            let alternatives: Vec<TaskAlternative> = chosen
                .into_iter()
                .map(|k| {
                    let processing = pick_workers(cfg, &mut r, base_proc);
                    let setup = if stations[k].requires_setup {
                        pick_workers(cfg, &mut r, base_setup)
                    } else {
                        Vec::new()
                    };
                    let automation = round_to(r.gen_range(cfg.automation.0..=cfg.automation.1), 0.05).clamp(0.0, 1.0);
                    all_proc.extend(processing.iter().map(|w| w.duration));
                    TaskAlternative {
                        station: k,
                        automation,
                        setup,
                        processing,
                    }
                })
                .collect();
            tasks.push(TaskSpec {
                release: 0.0,
                alternatives,
            });
        }
        jobs.push(Job {
            name: format!("J{j}"),
            tasks,
            due_date: None,
        });
    }

    let mean_proc = all_proc.iter().sum::<f64>() / all_proc.len().max(1) as f64;
    for job in &mut jobs {
        for t in &mut job.tasks {
            t.release = r.gen_range(0.0..=cfg.release_spread * mean_proc).round();
        }
    }

    let mut instance = ProblemInstance {
        name: if cfg.name.is_empty() { "generated".into() } else { cfg.name.clone() },
        weights: ObjectiveWeights::default(),
        jobs,
        stations,
        workers: (0..cfg.workers).map(|w| Worker { name: format!("W{w}") }).collect(),
        job_precedence,
    };

    // sequence factors between tasks that can share a setup station
    let refs: Vec<TaskRef> = instance.tasks().collect();
    for k in 0..cfg.stations {
        if !instance.stations[k].requires_setup || cfg.factor_density == 0.0 {
            continue;
        }
        let on_k: Vec<TaskRef> = refs
            .iter()
            .copied()
            .filter(|&t| instance.task(t).alternative(k).is_some())
            .collect();
        for &a in &on_k {
            for &b in &on_k {
                if a != b && r.gen_bool(cfg.factor_density) {
                    let s = round_to(r.gen_range(cfg.factor_range.0..=cfg.factor_range.1), 0.05)
                        .clamp(cfg.factor_range.0, cfg.factor_range.1);
                    instance.stations[k].sequence_factors.insert((a, b), s);
                }
            }
        }
    }

    assign_due_dates(&mut instance, cfg.due_tightness);

    let report = validate_instance(&instance);
    if !report.is_valid() {
        return Err(Error::InvalidInstance(report.to_string()));
    }
    Ok(instance)
}

/// Lower bound on a job's completion: longest chain of predecessor jobs
/// plus the job's own minimum setup and processing durations.
fn assign_due_dates(instance: &mut ProblemInstance, tightness: f64) {
    let n = instance.jobs.len();
    let min_work: Vec<Time> = instance
        .jobs
        .iter()
        .map(|job| {
            job.tasks
                .iter()
                .map(|t| {
                    t.alternatives
                        .iter()
                        .map(|a| {
                            let p = a.processing.iter().map(|w| w.duration).fold(f64::INFINITY, f64::min);
                            let s = a.setup.iter().map(|w| w.duration).fold(f64::INFINITY, f64::min);
                            p + if s.is_finite() { s } else { 0.0 }
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .sum()
        })
        .collect();
    let first_release: Vec<Time> = instance.jobs.iter().map(|j| j.tasks[0].release).collect();
    let mut preds = vec![Vec::new(); n];
    let mut has_succ = vec![false; n];
    for e in &instance.job_precedence {
        preds[e.after].push(e.before);
        has_succ[e.before] = true;
    }
    // edges always point to later jobs, so index order is topological
    let mut lb = vec![0.0; n];
    for j in 0..n {
        let start = preds[j].iter().map(|&p| lb[p]).fold(first_release[j], f64::max);
        lb[j] = start + min_work[j];
    }
    for j in 0..n {
        instance.jobs[j].due_date = (!has_succ[j]).then(|| (lb[j] * tightness).ceil());
    }
}
