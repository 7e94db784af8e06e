//! Aggregation of search results into benchmark tables.

use crate::error::{Error, Result};
use crate::search::{Heuristic, SearchResult};
use serde::Serialize;
use std::fmt::Write as _;

/// Mean and sample standard deviation of a set of values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample estimator (n - 1); zero for a single value.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary {
                count: 0,
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        if values.iter().all(|&v| v == values[0]) {
            // avoid rounding noise from summing equal values
            return Summary {
                count: n,
                mean: values[0],
                std: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Summary { count: n, mean, std }
    }
}

/// One finished search run on a named dataset.
#[derive(Clone, Copy, Debug)]
pub struct Run<'a> {
    pub dataset: &'a str,
    pub result: &'a SearchResult,
}

/// Row and column order of the rendered tables. Empty lists mean
/// "order of first appearance".
#[derive(Clone, Debug, Default)]
pub struct ReportLayout {
    pub datasets: Vec<String>,
    pub heuristics: Vec<Heuristic>,
    /// Every cell must hold at least this many runs.
    pub min_runs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellStats {
    pub dataset: String,
    pub heuristic: Heuristic,
    pub makespan: Summary,
    pub tardiness: Summary,
    pub z: Summary,
}

/// Best and mean Z per generation, averaged over the runs of a cell that
/// reached that generation.
#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub dataset: String,
    pub heuristic: Heuristic,
    pub generation: usize,
    pub runs: usize,
    pub best_z: f64,
    pub mean_z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingRow {
    pub parallelism: usize,
    pub heuristic: Heuristic,
    pub seconds_per_iteration: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    pub datasets: Vec<String>,
    pub heuristics: Vec<Heuristic>,
    pub cells: Vec<CellStats>,
    pub curves: Vec<CurvePoint>,
    pub timings: Vec<TimingRow>,
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

pub fn build_report(runs: &[Run<'_>], layout: &ReportLayout) -> Result<BenchmarkReport> {
    if runs.is_empty() {
        return Err(Error::EmptyResults);
    }
    let datasets = if layout.datasets.is_empty() {
        first_seen(runs.iter().map(|r| r.dataset.to_string()))
    } else {
        layout.datasets.clone()
    };
    let heuristics = if layout.heuristics.is_empty() {
        first_seen(runs.iter().map(|r| r.result.heuristic))
    } else {
        layout.heuristics.clone()
    };

    let mut cells = Vec::new();
    let mut curves = Vec::new();
    for d in &datasets {
        for &h in &heuristics {
            let rs: Vec<&SearchResult> = runs
                .iter()
                .filter(|r| r.dataset == d && r.result.heuristic == h)
                .map(|r| r.result)
                .collect();
            if rs.is_empty() || rs.len() < layout.min_runs {
                return Err(Error::Config(format!(
                    "cell ({d}, {h}) has {} runs, need at least {}",
                    rs.len(),
                    layout.min_runs.max(1)
                )));
            }
            let pick = |f: fn(&SearchResult) -> f64| Summary::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            cells.push(CellStats {
                dataset: d.clone(),
                heuristic: h,
                makespan: pick(|r| r.best_metrics.makespan),
                tardiness: pick(|r| r.best_metrics.total_tardiness),
                z: pick(|r| r.best_z),
            });
            let longest = rs.iter().map(|r| r.progress.len()).max().unwrap_or(0);
            for g in 0..longest {
                let at: Vec<_> = rs.iter().filter_map(|r| r.progress.get(g)).collect();
                let n = at.len() as f64;
                curves.push(CurvePoint {
                    dataset: d.clone(),
                    heuristic: h,
                    generation: at[0].generation,
                    runs: at.len(),
                    best_z: at.iter().map(|p| p.best_z).sum::<f64>() / n,
                    mean_z: at.iter().map(|p| p.mean_z).sum::<f64>() / n,
                });
            }
        }
    }

    let levels = {
        let mut v = first_seen(runs.iter().map(|r| r.result.parallelism));
        v.sort_unstable();
        v
    };
    let mut timings = Vec::new();
    for &p in &levels {
        for &h in &heuristics {
            let secs: Vec<f64> = runs
                .iter()
                .filter(|r| r.result.parallelism == p && r.result.heuristic == h)
                .map(|r| r.result.seconds_per_iteration())
                .collect();
            if !secs.is_empty() {
                timings.push(TimingRow {
                    parallelism: p,
                    heuristic: h,
                    seconds_per_iteration: Summary::of(&secs),
                });
            }
        }
    }

    Ok(BenchmarkReport {
        datasets,
        heuristics,
        cells,
        curves,
        timings,
    })
}

impl BenchmarkReport {
    pub fn cell(&self, dataset: &str, heuristic: Heuristic) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.dataset == dataset && c.heuristic == heuristic)
    }

    fn pair_table(&self, value: fn(&Summary) -> f64) -> String {
        let mut out = String::from("dataset");
        for h in &self.heuristics {
            let h = h.as_str().to_uppercase();
            let _ = write!(out, "\t{h} MS\t{h} TT");
        }
        out.push('\n');
        for d in &self.datasets {
            out.push_str(d);
            for &h in &self.heuristics {
                let c = self.cell(d, h).expect("every cell is filled");
                let _ = write!(out, "\t{}\t{}", value(&c.makespan), value(&c.tardiness));
            }
            out.push('\n');
        }
        out
    }

    /// Mean MS and TT: one row per dataset, one column pair per heuristic.
    pub fn means_tsv(&self) -> String {
        self.pair_table(|s| s.mean)
    }

    /// Sample standard deviations in the same layout as `means_tsv`.
    pub fn std_tsv(&self) -> String {
        self.pair_table(|s| s.std)
    }

    pub fn curves_tsv(&self) -> String {
        let mut out = String::from("dataset\theuristic\tgeneration\truns\tbest_z\tmean_z\n");
        for c in &self.curves {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                c.dataset, c.heuristic, c.generation, c.runs, c.best_z, c.mean_z
            );
        }
        out
    }

    /// Mean seconds per iteration: one row per parallelism level.
    pub fn timing_tsv(&self) -> String {
        let mut out = String::from("parallelism");
        for h in &self.heuristics {
            let _ = write!(out, "\t{}", h.as_str().to_uppercase());
        }
        out.push('\n');
        let mut levels: Vec<usize> = self.timings.iter().map(|t| t.parallelism).collect();
        levels.dedup();
        for p in levels {
            let _ = write!(out, "{p}");
            for &h in &self.heuristics {
                match self.timings.iter().find(|t| t.parallelism == p && t.heuristic == h) {
                    Some(t) => {
                        let _ = write!(out, "\t{}", t.seconds_per_iteration.mean);
                    }
                    None => out.push('\t'),
                }
            }
            out.push('\n');
        }
        out
    }
}
