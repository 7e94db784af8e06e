//! Mixed-integer model of an instance in CPLEX LP format.
//!
//! Variable families: `a_*`/`b_*` operation start/end, `g_*` station choice,
//! `ds_*`/`dp_*` setup/processing worker choice, `psi_*` direct setup
//! succession per station (`psi0_*` marks the first setup), `ord_*`
//! succession positions, `lam_*` occupancy order, `th_*` slot lane choice,
//! `mu_*` worker order, `sig_*` tardiness, `cmax` makespan.

use crate::error::{Error, Result};
use crate::instance::{Baseline, OpKind, ProblemInstance, Schedule, TaskRef};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
struct Var {
    kind: VarKind,
    lower: f64,
    upper: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct LpModel {
    vars: BTreeMap<String, Var>,
    var_order: Vec<String>,
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<Row>,
    pub big_m: f64,
    header: Vec<String>,
}

impl LpModel {
    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: Option<f64>) -> String {
        if !self.vars.contains_key(&name) {
            self.var_order.push(name.clone());
            self.vars.insert(name.clone(), Var { kind, lower, upper });
        }
        name
    }

    fn cont(&mut self, name: String) -> String {
        self.var(name, VarKind::Continuous, 0.0, None)
    }

    fn bin(&mut self, name: String) -> String {
        self.var(name, VarKind::Binary, 0.0, Some(1.0))
    }

    fn row(&mut self, name: String, terms: Vec<(f64, String)>, sense: Sense, rhs: f64) {
        self.rows.push(Row { name, terms, sense, rhs });
    }

    pub fn variable_count(&self) -> usize {
        self.vars.len()
    }

    pub fn binary_count(&self) -> usize {
        self.vars.values().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Number of rows whose name starts with `family` followed by `_`.
    pub fn count_rows(&self, family: &str) -> usize {
        let prefix = format!("{family}_");
        self.rows.iter().filter(|r| r.name.starts_with(&prefix)).count()
    }

    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        for line in &self.header {
            let _ = writeln!(out, "\\ {line}");
        }
        out.push_str("Minimize\n obj:");
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(out, " {}:", r.name);
            write_terms(&mut out, &r.terms);
            let _ = writeln!(out, " {} {}", r.sense.as_str(), num(r.rhs));
        }
        out.push_str("Bounds\n");
        for name in &self.var_order {
            let v = &self.vars[name];
            if v.kind == VarKind::Binary {
                continue;
            }
            match v.upper {
                Some(u) => {
                    let _ = writeln!(out, " {} <= {name} <= {}", num(v.lower), num(u));
                }
                None if v.lower != 0.0 => {
                    let _ = writeln!(out, " {name} >= {}", num(v.lower));
                }
                None => {}
            }
        }
        for (title, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
            let names: Vec<&String> = self.var_order.iter().filter(|n| self.vars[*n].kind == kind).collect();
            if !names.is_empty() {
                let _ = writeln!(out, "{title}");
                for chunk in names.chunks(8) {
                    let line: Vec<&str> = chunk.iter().map(|s| s.as_str()).collect();
                    let _ = writeln!(out, " {}", line.join(" "));
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn write_terms(out: &mut String, terms: &[(f64, String)]) {
    if terms.is_empty() {
        out.push_str(" 0 cmax");
        return;
    }
    for (i, (c, v)) in terms.iter().enumerate() {
        let sign = if *c < 0.0 { "-" } else if i == 0 { "" } else { "+" };
        let mag = c.abs();
        if mag == 1.0 {
            let _ = write!(out, " {sign} {v}");
        } else {
            let _ = write!(out, " {sign} {} {v}", num(mag));
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    /// Baseline used to normalize the objective terms; raw weights if absent.
    pub baseline: Option<Baseline>,
    /// Refuse models with more variables than this.
    pub max_variables: usize,
    /// Turn due dates into hard deadlines.
    pub hard_due_dates: bool,
    /// Fix assignments and times to this schedule.
    pub pin: Option<Schedule>,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            baseline: None,
            max_variables: 20_000,
            hard_due_dates: false,
            pin: None,
        }
    }
}

fn tag(t: TaskRef) -> String {
    format!("{}_{}", t.job, t.task)
}

/// Builds the model. Rows are named `<family>_<indices>` with families
/// release, proc_duration, setup_duration, setup_idle, setup_nonneg,
/// station_choice, proc_worker, setup_worker, chain_pred, chain_succ,
/// chain_start, chain_order, chain_time, lane, occupancy, worker_overlap,
/// setup_before_processing, task_order, job_precedence, tardiness,
/// makespan, deadline and pin.
pub fn build_milp(instance: &ProblemInstance, options: &LpOptions) -> Result<LpModel> {
    let mut m = LpModel::default();
    let tasks: Vec<TaskRef> = instance.tasks().collect();

    let max_setup = |t: TaskRef| {
        instance
            .task(t)
            .alternatives
            .iter()
            .filter(|a| instance.needs_setup(a.station))
            .flat_map(|a| a.setup.iter().map(|w| w.duration))
            .fold(0.0, f64::max)
    };
    let max_proc = |t: TaskRef| {
        instance
            .task(t)
            .alternatives
            .iter()
            .flat_map(|a| a.processing.iter().map(|w| w.duration))
            .fold(0.0, f64::max)
    };
    let max_release = tasks.iter().map(|&t| instance.task(t).release).fold(0.0, f64::max);
    let big_m = 1.5 * tasks.iter().map(|&t| max_setup(t) + max_proc(t)).sum::<f64>() + max_release;
    m.big_m = big_m;
    m.header = vec![
        format!("instance {}", instance.name),
        format!("big-M = 1.5 * sum of maximum durations + latest release = {big_m}"),
        "worker attention is enforced pairwise for operation pairs whose loads can exceed 1".into(),
    ];
    let bm = big_m;

    let has_setup = |t: TaskRef| instance.task(t).alternatives.iter().any(|a| instance.needs_setup(a.station));

    let mut alpha = BTreeMap::new();
    let mut beta = BTreeMap::new();
    for &t in &tasks {
        let kinds: &[OpKind] = if has_setup(t) {
            &[OpKind::Setup, OpKind::Processing]
        } else {
            &[OpKind::Processing]
        };
        for &s in kinds {
            let c = if s == OpKind::Setup { "s" } else { "p" };
            alpha.insert((t, s), m.cont(format!("a_{c}_{}", tag(t))));
            beta.insert((t, s), m.cont(format!("b_{c}_{}", tag(t))));
        }
    }
    let occ_start = |t: TaskRef| {
        alpha
            .get(&(t, OpKind::Setup))
            .unwrap_or(&alpha[&(t, OpKind::Processing)])
            .clone()
    };

    // station and worker choice
    let mut gamma = BTreeMap::new();
    let mut dproc = BTreeMap::new();
    let mut dsetup = BTreeMap::new();
    for &t in &tasks {
        let spec = instance.task(t);
        let mut choice = Vec::new();
        for alt in &spec.alternatives {
            let k = alt.station;
            let g = m.bin(format!("g_{}_{k}", tag(t)));
            gamma.insert((t, k), g.clone());
            choice.push((1.0, g.clone()));
            let mut pw = vec![(-1.0, g.clone())];
            for w in &alt.processing {
                let d = m.bin(format!("dp_{}_{k}_{}", tag(t), w.worker));
                dproc.insert((t, k, w.worker), d.clone());
                pw.push((1.0, d));
            }
            m.row(format!("proc_worker_{}_{k}", tag(t)), pw, Sense::Eq, 0.0);
            if instance.needs_setup(k) {
                let mut sw = vec![(-1.0, g)];
                for w in &alt.setup {
                    let d = m.bin(format!("ds_{}_{k}_{}", tag(t), w.worker));
                    dsetup.insert((t, k, w.worker), d.clone());
                    sw.push((1.0, d));
                }
                m.row(format!("setup_worker_{}_{k}", tag(t)), sw, Sense::Eq, 0.0);
            }
        }
        m.row(format!("station_choice_{}", tag(t)), choice, Sense::Eq, 1.0);
    }

    // release and processing duration
    for &t in &tasks {
        let spec = instance.task(t);
        let ap = alpha[&(t, OpKind::Processing)].clone();
        let bp = beta[&(t, OpKind::Processing)].clone();
        m.row(format!("release_{}", tag(t)), vec![(1.0, ap.clone())], Sense::Ge, spec.release);
        let mut terms = vec![(1.0, bp), (-1.0, ap)];
        for alt in &spec.alternatives {
            for w in &alt.processing {
                terms.push((-w.duration, dproc[&(t, alt.station, w.worker)].clone()));
            }
        }
        m.row(format!("proc_duration_{}", tag(t)), terms, Sense::Eq, 0.0);
    }

    // setup succession per station
    let mut psi: BTreeMap<(TaskRef, TaskRef, usize), String> = BTreeMap::new();
    for (k, st) in instance.stations.iter().enumerate() {
        if !st.requires_setup {
            continue;
        }
        let on_k: Vec<TaskRef> = tasks.iter().copied().filter(|&t| gamma.contains_key(&(t, k))).collect();
        if on_k.is_empty() {
            continue;
        }
        let n = on_k.len() as f64;
        let mut starts = Vec::new();
        for &t in &on_k {
            let p0 = m.bin(format!("psi0_{}_{k}", tag(t)));
            starts.push((1.0, p0.clone()));
            let mut pred = vec![(1.0, p0), (-1.0, gamma[&(t, k)].clone())];
            for &q in &on_k {
                if q != t {
                    let p = m.bin(format!("psi_{}__{}_{k}", tag(q), tag(t)));
                    psi.insert((q, t, k), p.clone());
                    pred.push((1.0, p));
                }
            }
            m.row(format!("chain_pred_{}_{k}", tag(t)), pred, Sense::Eq, 0.0);
        }
        m.row(format!("chain_start_{k}"), starts, Sense::Le, 1.0);
        for &q in &on_k {
            let mut succ = vec![(-1.0, gamma[&(q, k)].clone())];
            succ.extend(on_k.iter().filter(|&&t| t != q).map(|&t| (1.0, psi[&(q, t, k)].clone())));
            m.row(format!("chain_succ_{}_{k}", tag(q)), succ, Sense::Le, 0.0);
        }
        for &t in &on_k {
            let ord = m.var(format!("ord_{}_{k}", tag(t)), VarKind::Integer, 0.0, Some(n));
            for &q in &on_k {
                if q == t {
                    continue;
                }
                let p = psi[&(q, t, k)].clone();
                let ord_q = format!("ord_{}_{k}", tag(q));
                m.row(
                    format!("chain_order_{}__{}_{k}", tag(q), tag(t)),
                    vec![(1.0, ord.clone()), (-1.0, ord_q), (-n, p.clone())],
                    Sense::Ge,
                    1.0 - n,
                );
                m.row(
                    format!("chain_time_{}__{}_{k}", tag(q), tag(t)),
                    vec![
                        (1.0, alpha[&(t, OpKind::Setup)].clone()),
                        (-1.0, alpha[&(q, OpKind::Setup)].clone()),
                        (-bm, p),
                    ],
                    Sense::Ge,
                    -bm,
                );
            }
        }
    }

    // sequence-dependent setup durations
    for &t in &tasks {
        if !has_setup(t) {
            continue;
        }
        let a = alpha[&(t, OpKind::Setup)].clone();
        let b = beta[&(t, OpKind::Setup)].clone();
        m.row(format!("setup_nonneg_{}", tag(t)), vec![(1.0, b.clone()), (-1.0, a.clone())], Sense::Ge, 0.0);
        let spec = instance.task(t);
        let mut setup_gammas = Vec::new();
        for alt in spec.alternatives.iter().filter(|a| instance.needs_setup(a.station)) {
            let k = alt.station;
            setup_gammas.push((-bm, gamma[&(t, k)].clone()));
            let factors: Vec<(f64, String)> = psi
                .iter()
                .filter(|((_, to, kk), _)| *to == t && *kk == k)
                .map(|((from, _, _), p)| (instance.stations[k].sequence_factor(Some(*from), t), p.clone()))
                .filter(|(s, _)| *s != 0.0)
                .collect();
            for w in &alt.setup {
                let d = w.duration;
                let dv = dsetup[&(t, k, w.worker)].clone();
                let mut ge = vec![(1.0, b.clone()), (-1.0, a.clone())];
                ge.extend(factors.iter().map(|(s, p)| (-d * s, p.clone())));
                let mut le = ge.clone();
                ge.push((-bm, dv.clone()));
                le.push((bm, dv));
                m.row(format!("setup_duration_{}_{k}_{}_lo", tag(t), w.worker), ge, Sense::Ge, d - bm);
                m.row(format!("setup_duration_{}_{k}_{}_hi", tag(t), w.worker), le, Sense::Le, d + bm);
            }
        }
        if spec.alternatives.iter().any(|a| !instance.needs_setup(a.station)) {
            let mut terms = vec![(1.0, b), (-1.0, a)];
            terms.extend(setup_gammas);
            m.row(format!("setup_idle_{}", tag(t)), terms, Sense::Le, 0.0);
        }
        m.row(
            format!("setup_before_processing_{}", tag(t)),
            vec![
                (1.0, alpha[&(t, OpKind::Processing)].clone()),
                (-1.0, beta[&(t, OpKind::Setup)].clone()),
            ],
            Sense::Ge,
            0.0,
        );
    }

    // station occupancy: each task holds a slot lane from setup start to processing end
    for (k, st) in instance.stations.iter().enumerate() {
        let on_k: Vec<TaskRef> = tasks.iter().copied().filter(|&t| gamma.contains_key(&(t, k))).collect();
        if on_k.len() < 2 {
            continue;
        }
        let lanes = st.slots.min(on_k.len());
        let lane_var = |m: &mut LpModel, t: TaskRef, l: usize| -> String {
            if lanes == 1 {
                gamma[&(t, k)].clone()
            } else {
                m.bin(format!("th_{}_{k}_{l}", tag(t)))
            }
        };
        if lanes > 1 {
            for &t in &on_k {
                let mut terms = vec![(-1.0, gamma[&(t, k)].clone())];
                for l in 0..lanes {
                    terms.push((1.0, lane_var(&mut m, t, l)));
                }
                m.row(format!("lane_{}_{k}", tag(t)), terms, Sense::Eq, 0.0);
            }
        }
        for (i, &t) in on_k.iter().enumerate() {
            for &q in &on_k[i + 1..] {
                let lam = m.bin(format!("lam_{}__{}_{k}", tag(t), tag(q)));
                for l in 0..lanes {
                    let (vt, vq) = (lane_var(&mut m, t, l), lane_var(&mut m, q, l));
                    // lam = 1: t before q
                    m.row(
                        format!("occupancy_{}__{}_{k}_{l}_a", tag(t), tag(q)),
                        vec![
                            (1.0, occ_start(q)),
                            (-1.0, beta[&(t, OpKind::Processing)].clone()),
                            (-bm, lam.clone()),
                            (-bm, vt.clone()),
                            (-bm, vq.clone()),
                        ],
                        Sense::Ge,
                        -3.0 * bm,
                    );
                    m.row(
                        format!("occupancy_{}__{}_{k}_{l}_b", tag(t), tag(q)),
                        vec![
                            (1.0, occ_start(t)),
                            (-1.0, beta[&(q, OpKind::Processing)].clone()),
                            (bm, lam.clone()),
                            (-bm, vt),
                            (-bm, vq),
                        ],
                        Sense::Ge,
                        -2.0 * bm,
                    );
                }
            }
        }
    }

    // worker attention, pairwise where two loads can exceed one
    type OpOpt = (TaskRef, OpKind, usize, usize, f64, String);
    let mut op_opts: Vec<OpOpt> = Vec::new();
    for &t in &tasks {
        for alt in &instance.task(t).alternatives {
            let k = alt.station;
            for w in &alt.processing {
                op_opts.push((t, OpKind::Processing, k, w.worker, alt.automation, dproc[&(t, k, w.worker)].clone()));
            }
            if instance.needs_setup(k) {
                for w in &alt.setup {
                    op_opts.push((t, OpKind::Setup, k, w.worker, 1.0, dsetup[&(t, k, w.worker)].clone()));
                }
            }
        }
    }
    for (i, x) in op_opts.iter().enumerate() {
        for y in &op_opts[i + 1..] {
            if x.0 == y.0 || x.3 != y.3 || x.4 + y.4 <= 1.0 + 1e-9 {
                continue;
            }
            let ((ta, sa), (tb, sb)) = if (x.0, x.1) < (y.0, y.1) { ((x.0, x.1), (y.0, y.1)) } else { ((y.0, y.1), (x.0, x.1)) };
            let w = x.3;
            let opname = |s: OpKind| if s == OpKind::Setup { "s" } else { "p" };
            let mu = m.bin(format!("mu_{}{}__{}{}_{w}", opname(sa), tag(ta), opname(sb), tag(tb)));
            let id = format!("{}{}_{}__{}{}_{}_{w}", opname(sa), tag(ta), x.2, opname(sb), tag(tb), y.2);
            m.row(
                format!("worker_overlap_{id}_a"),
                vec![
                    (1.0, alpha[&(tb, sb)].clone()),
                    (-1.0, beta[&(ta, sa)].clone()),
                    (-bm, mu.clone()),
                    (-bm, x.5.clone()),
                    (-bm, y.5.clone()),
                ],
                Sense::Ge,
                -3.0 * bm,
            );
            m.row(
                format!("worker_overlap_{id}_b"),
                vec![
                    (1.0, alpha[&(ta, sa)].clone()),
                    (-1.0, beta[&(tb, sb)].clone()),
                    (bm, mu),
                    (-bm, x.5.clone()),
                    (-bm, y.5.clone()),
                ],
                Sense::Ge,
                -2.0 * bm,
            );
        }
    }

    // task order and job precedence
    for &t in &tasks {
        if t.task > 0 {
            let prev = TaskRef::new(t.job, t.task - 1);
            m.row(
                format!("task_order_{}", tag(t)),
                vec![
                    (1.0, alpha[&(t, OpKind::Processing)].clone()),
                    (-1.0, beta[&(prev, OpKind::Processing)].clone()),
                ],
                Sense::Ge,
                0.0,
            );
        }
    }
    for e in &instance.job_precedence {
        let last = instance.last_task(e.before);
        let first = TaskRef::new(e.after, 0);
        m.row(
            format!("job_precedence_{}_{}", e.before, e.after),
            vec![
                (1.0, alpha[&(first, OpKind::Processing)].clone()),
                (-1.0, beta[&(last, OpKind::Processing)].clone()),
            ],
            Sense::Ge,
            0.0,
        );
    }

    // objectives
    let cmax = m.cont("cmax".into());
    for &t in &tasks {
        m.row(
            format!("makespan_{}", tag(t)),
            vec![(1.0, cmax.clone()), (-1.0, beta[&(t, OpKind::Processing)].clone())],
            Sense::Ge,
            0.0,
        );
    }
    let (cb, tb) = options
        .baseline
        .as_ref()
        .map_or((1.0, 1.0), |b| (b.makespan, b.tardiness.max(1.0)));
    if !(cb > 0.0) {
        return Err(Error::ZeroBaseline(cb));
    }
    m.objective.push((instance.weights.makespan / cb, cmax));
    for (i, job) in instance.jobs.iter().enumerate() {
        let Some(due) = job.due_date else { continue };
        let sig = m.cont(format!("sig_{i}"));
        let end = beta[&(instance.last_task(i), OpKind::Processing)].clone();
        m.row(format!("tardiness_{i}"), vec![(1.0, sig.clone()), (-1.0, end.clone())], Sense::Ge, -due);
        if options.hard_due_dates {
            m.row(format!("deadline_{i}"), vec![(1.0, end)], Sense::Le, due);
        }
        m.objective.push((instance.weights.tardiness / tb, sig));
    }

    if let Some(schedule) = &options.pin {
        for op in &schedule.operations {
            let (Some(a), Some(b)) = (alpha.get(&(op.task, op.kind)), beta.get(&(op.task, op.kind))) else {
                continue;
            };
            let id = format!("{}_{}", tag(op.task), op.kind.as_str());
            m.row(format!("pin_{id}_start"), vec![(1.0, a.clone())], Sense::Eq, op.start);
            m.row(format!("pin_{id}_end"), vec![(1.0, b.clone())], Sense::Eq, op.end);
            if let Some(g) = gamma.get(&(op.task, op.station)) {
                m.row(format!("pin_{id}_station"), vec![(1.0, g.clone())], Sense::Eq, 1.0);
            }
            let dv = match op.kind {
                OpKind::Processing => dproc.get(&(op.task, op.station, op.worker)),
                OpKind::Setup => dsetup.get(&(op.task, op.station, op.worker)),
            };
            if let Some(d) = dv {
                m.row(format!("pin_{id}_worker"), vec![(1.0, d.clone())], Sense::Eq, 1.0);
            }
        }
    }

    if m.variable_count() > options.max_variables {
        return Err(Error::ModelTooLarge {
            estimate: m.variable_count(),
            cap: options.max_variables,
        });
    }
    Ok(m)
}

/// LP-format text of the instance's model.
pub fn export_milp(instance: &ProblemInstance, options: &LpOptions) -> Result<String> {
    Ok(build_milp(instance, options)?.to_lp_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;

    #[test]
    fn single_task_has_one_setup_order_row() {
        let m = build_milp(&single_task(0.0), &LpOptions::default()).unwrap();
        assert_eq!(m.count_rows("setup_before_processing"), 1);
        assert_eq!(m.count_rows("release"), 1);
        assert_eq!(m.count_rows("station_choice"), 1);
        assert_eq!(m.count_rows("occupancy"), 0);
        assert_eq!(m.count_rows("worker_overlap"), 0);
        let text = m.to_lp_string();
        assert!(text.contains("Minimize") && text.contains("Binaries") && text.ends_with("End\n"));
    }

    fn two_tasks_one_station() -> ProblemInstance {
        let t = || task(0.0, vec![alt(0, &[(0, 2.0)], &[(0, 3.0)])]);
        instance(vec![job(vec![t()], Some(4.0)), job(vec![t()], None)], vec![station(1, true)], 1)
    }

    #[test]
    fn row_families_scale_with_shape() {
        let m = build_milp(&two_tasks_one_station(), &LpOptions::default()).unwrap();
        assert_eq!(m.count_rows("setup_before_processing"), 2);
        assert_eq!(m.count_rows("chain_pred"), 2);
        assert_eq!(m.count_rows("chain_order"), 2);
        // one task pair on a single-slot station: two disjunctive rows
        assert_eq!(m.count_rows("occupancy"), 2);
        // setup/setup, setup/processing both ways and processing/processing
        assert_eq!(m.count_rows("worker_overlap"), 8);
        assert_eq!(m.count_rows("tardiness"), 1);
        assert_eq!(m.count_rows("makespan"), 2);
    }

    #[test]
    fn cap_reports_estimate() {
        let opts = LpOptions {
            max_variables: 5,
            ..Default::default()
        };
        match build_milp(&two_tasks_one_station(), &opts) {
            Err(Error::ModelTooLarge { estimate, cap }) => {
                assert!(estimate > 5);
                assert_eq!(cap, 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multi_slot_station_gets_lanes() {
        let mut inst = two_tasks_one_station();
        inst.stations[0].slots = 2;
        let m = build_milp(&inst, &LpOptions::default()).unwrap();
        assert_eq!(m.count_rows("lane"), 2);
        assert_eq!(m.count_rows("occupancy"), 4);
    }

    // Solves an LP file with HiGHS through its Python bindings. `None` when
    // the bindings are not installed.
    fn highs(text: &str, relax: bool) -> Option<(String, f64)> {
        const SCRIPT: &str = "import sys, highspy\n\
h = highspy.Highs()\n\
h.setOptionValue('output_flag', False)\n\
if sys.argv[2] == '1': h.setOptionValue('solve_relaxation', True)\n\
h.readModel(sys.argv[1])\n\
h.run()\n\
print(h.modelStatusToString(h.getModelStatus()))\n\
print(h.getInfo().objective_function_value)\n";
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.lp");
        std::fs::write(&path, text).unwrap();
        let out = std::process::Command::new("python3")
            .args(["-c", SCRIPT, path.to_str().unwrap(), if relax { "1" } else { "0" }])
            .output()
            .ok()?;
        if !out.status.success() {
            eprintln!("HiGHS unavailable, skipping solver check");
            return None;
        }
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        let status = lines.next()?.to_string();
        let obj = lines.next()?.trim().parse().unwrap_or(f64::NAN);
        Some((status, obj))
    }

    #[test]
    fn infeasible_toy_is_infeasible_on_both_paths() {
        use crate::instance::{check_schedule_feasibility, OpKind, Operation, Schedule, TaskRef, Violation};
        use crate::search::brute_force;
        // released at 10, setup 2 and processing 5, due at 12: earliest finish is 15
        let mut inst = single_task(10.0);
        inst.jobs[0].due_date = Some(12.0);
        let base = Baseline {
            makespan: 15.0,
            tardiness: 1.0,
        };

        let best = brute_force(&inst, &base, 1_000).unwrap();
        assert_eq!(best.metrics.total_tardiness, 3.0);
        let on_time = Schedule {
            operations: vec![
                Operation {
                    task: TaskRef::new(0, 0),
                    kind: OpKind::Setup,
                    station: 0,
                    worker: 0,
                    start: 0.0,
                    end: 2.0,
                },
                Operation {
                    task: TaskRef::new(0, 0),
                    kind: OpKind::Processing,
                    station: 0,
                    worker: 0,
                    start: 7.0,
                    end: 12.0,
                },
            ],
        };
        let v = check_schedule_feasibility(&inst, &on_time);
        assert!(v.iter().any(|x| matches!(x, Violation::ReleaseTime { .. })), "{v:?}");

        let opts = LpOptions {
            hard_due_dates: true,
            ..Default::default()
        };
        let m = build_milp(&inst, &opts).unwrap();
        assert_eq!(m.count_rows("deadline"), 1);
        if let Some((status, _)) = highs(&m.to_lp_string(), true) {
            assert_eq!(status, "Infeasible");
        }
        // without the hard deadline the same model is solvable
        if let Some((status, obj)) = highs(&export_milp(&inst, &LpOptions::default()).unwrap(), false) {
            assert_eq!(status, "Optimal");
            let w = inst.weights;
            assert!((obj - (w.makespan * 15.0 + w.tardiness * 3.0)).abs() < 1e-6, "{obj}");
        }
    }

    #[test]
    fn brute_force_matches_solver_on_two_tasks() {
        use crate::search::brute_force;
        let inst = two_tasks_one_station();
        let base = Baseline {
            makespan: 10.0,
            tardiness: 1.0,
        };
        let best = brute_force(&inst, &base, 1_000).unwrap();
        let opts = LpOptions {
            baseline: Some(base),
            ..Default::default()
        };
        if let Some((status, obj)) = highs(&export_milp(&inst, &opts).unwrap(), false) {
            assert_eq!(status, "Optimal");
            assert!((obj - best.z).abs() < 1e-6, "solver {obj} vs enumeration {}", best.z);
        }
    }
}
