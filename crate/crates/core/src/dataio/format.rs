use crate::error::{Error, Result};
use crate::instance::{validate_instance, OpKind, Operation, ProblemInstance, Schedule, TaskRef, Time};
use crate::sim::TraceEvent;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn instance_to_toml(instance: &ProblemInstance) -> Result<String> {
    toml::to_string(instance).map_err(|e| Error::Format {
        path: String::new(),
        message: e.to_string(),
    })
}

/// Parses and validates an instance document. Schema errors carry the path
/// of the offending field.
pub fn instance_from_toml(text: &str) -> Result<ProblemInstance> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| Error::Format {
        path: String::new(),
        message: e.to_string(),
    })?;
    let instance: ProblemInstance = serde_path_to_error::deserialize(de).map_err(|e| Error::Format {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let report = validate_instance(&instance);
    if !report.is_valid() {
        return Err(Error::InvalidInstance(report.to_string()));
    }
    Ok(instance)
}

pub fn save_instance(instance: &ProblemInstance, path: &Path) -> Result<()> {
    write_atomic(path, instance_to_toml(instance)?.as_bytes())
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    instance_from_toml(&fs::read_to_string(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRow {
    job: usize,
    task: usize,
    kind: OpKind,
    station: usize,
    worker: usize,
    start: Time,
    end: Time,
}

/// One row per operation: job,task,kind,station,worker,start,end.
pub fn schedule_to_csv(schedule: &Schedule) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for op in &schedule.operations {
        w.serialize(ScheduleRow {
            job: op.task.job,
            task: op.task.task,
            kind: op.kind,
            station: op.station,
            worker: op.worker,
            start: op.start,
            end: op.end,
        })?;
    }
    if schedule.operations.is_empty() {
        w.write_record(["job", "task", "kind", "station", "worker", "start", "end"])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn schedule_from_csv(text: &str) -> Result<Schedule> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut operations = Vec::new();
    for row in r.deserialize() {
        let row: ScheduleRow = row?;
        operations.push(Operation {
            task: TaskRef::new(row.job, row.task),
            kind: row.kind,
            station: row.station,
            worker: row.worker,
            start: row.start,
            end: row.end,
        });
    }
    Ok(Schedule { operations })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GanttBar {
    pub label: String,
    pub job: usize,
    pub task: usize,
    pub kind: OpKind,
    pub worker: usize,
    pub start: Time,
    pub end: Time,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GanttLane {
    pub station: usize,
    pub name: String,
    pub bars: Vec<GanttBar>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Gantt {
    pub instance: String,
    pub makespan: Time,
    pub lanes: Vec<GanttLane>,
}

/// One lane per station with its operations as labelled bars, sorted by start.
pub fn schedule_to_gantt(instance: &ProblemInstance, schedule: &Schedule) -> Result<String> {
    let mut lanes: Vec<GanttLane> = instance
        .stations
        .iter()
        .enumerate()
        .map(|(k, s)| GanttLane {
            station: k,
            name: s.name.clone(),
            bars: Vec::new(),
        })
        .collect();
    for op in &schedule.operations {
        if let Some(lane) = lanes.get_mut(op.station) {
            lane.bars.push(GanttBar {
                label: format!("{} {}", op.task, op.kind),
                job: op.task.job,
                task: op.task.task,
                kind: op.kind,
                worker: op.worker,
                start: op.start,
                end: op.end,
            });
        }
    }
    for lane in &mut lanes {
        lane.bars.sort_by(|a, b| a.start.total_cmp(&b.start));
    }
    let gantt = Gantt {
        instance: instance.name.clone(),
        makespan: schedule.operations.iter().map(|o| o.end).fold(0.0, f64::max),
        lanes,
    };
    Ok(serde_json::to_string_pretty(&gantt)?)
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    time: Time,
    station: usize,
    slot: usize,
    job: usize,
    task: usize,
    worker: Option<usize>,
    phase: &'a str,
}

/// Simulator event log as csv: time,station,slot,job,task,worker,phase.
pub fn trace_to_csv(trace: &[TraceEvent]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in trace {
        w.serialize(TraceRow {
            time: e.time,
            station: e.station,
            slot: e.slot,
            job: e.task.job,
            task: e.task.task,
            worker: e.worker,
            phase: e.phase.as_str(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
