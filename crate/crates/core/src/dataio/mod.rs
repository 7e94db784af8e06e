//! Instance generation, file formats, schedule exports, LP model export and
//! benchmark reports.

mod format;
mod generator;
mod lp;
mod report;

pub use format::{
    instance_from_toml, instance_to_toml, load_instance, save_instance, schedule_from_csv, schedule_to_csv,
    schedule_to_gantt, trace_to_csv, write_atomic, Gantt, GanttBar, GanttLane,
};
pub use generator::{generate_instance, GeneratorConfig};
pub use lp::{build_milp, export_milp, LpModel, LpOptions, Row, Sense};
pub use report::{build_report, BenchmarkReport, CellStats, CurvePoint, ReportLayout, Run, Summary, TimingRow};
