use crate::args::*;
use crate::manifest::{read_manifest, sha256_file, ManifestBuilder, MANIFEST_FILE};
use drcsched::agent::{read_policy, save_policy, train_policy, ActMode, AgentPolicy, NetShape, TrainerConfig};
use drcsched::dataio::{
    build_milp, build_report, generate_instance, instance_to_toml, load_instance, schedule_from_csv, schedule_to_csv,
    schedule_to_gantt, GeneratorConfig, LpOptions, ReportLayout, Run,
};
use drcsched::search::{reference_baseline, run_heuristic, Heuristic, PolicySource, SearchConfig, SearchResult};
use drcsched::{check_schedule_feasibility, Error, ProblemInstance};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Process exit status with the message printed on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;
pub const EXIT_MISMATCH: u8 = 1;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Divergence { .. } | Error::NonFiniteFeature { .. } => EXIT_DIVERGED,
            Error::Deadlock { .. } => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = Result<(), Failure>;

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Configuration from the manifest snapshot when replaying, else from the
/// config file, else defaults.
fn resolve<T: DeserializeOwned + Default>(snapshot: Option<&serde_json::Value>, file: Option<&Path>) -> Result<T, Failure> {
    match (snapshot, file) {
        (Some(v), _) => serde_json::from_value(v.clone()).map_err(|e| Failure::usage(format!("manifest config: {e}"))),
        (None, Some(p)) => read_toml(p),
        (None, None) => Ok(T::default()),
    }
}

fn json<T: Serialize>(v: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(v).map_err(|e| Error::from(e).into())
}

fn load(path: &Path) -> Result<ProblemInstance, Failure> {
    load_instance(path).map_err(|e| match e {
        Error::Io(io) => Failure::usage(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}

fn file_root(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let root = out.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = PathBuf::from(out.file_name().unwrap_or_default());
    let manifest = root.join(format!("{}.manifest.json", name.display()));
    (root, name, manifest)
}

pub fn run(command: &Command, snapshot: Option<&serde_json::Value>) -> CmdResult {
    match command {
        Command::Generate(a) => generate(command, a, snapshot),
        Command::Validate(a) => validate(a),
        Command::Solve(a) => solve(command, a, snapshot),
        Command::Train(a) => train(command, a, snapshot),
        Command::Bench(a) => bench(command, a, snapshot),
        Command::Check(a) => check(a),
        Command::ExportLp(a) => export_lp(command, a),
        Command::Replay(a) => replay(a),
    }
}

fn generate(command: &Command, a: &GenerateArgs, snapshot: Option<&serde_json::Value>) -> CmdResult {
    let mut cfg: GeneratorConfig = match (snapshot, &a.preset, &a.config) {
        (Some(v), _, _) => serde_json::from_value(v.clone()).map_err(|e| Failure::usage(format!("manifest config: {e}")))?,
        (None, Some(name), _) => GeneratorConfig::preset(name, 0)?,
        (None, None, Some(path)) => read_toml(path)?,
        (None, None, None) => return Err(Failure::usage("either --preset or --config is required")),
    };
    if snapshot.is_none() {
        if let Some(s) = a.seed {
            cfg.seed = s;
        }
    }
    let inst = generate_instance(&cfg)?;
    let (root, name, manifest) = file_root(&a.out);
    let mut m = ManifestBuilder::new(&root, command, json(&cfg)?);
    m.seeds([cfg.seed]);
    if let (None, Some(p)) = (snapshot, &a.config) {
        m.input(p)?;
    }
    m.artifact(&name, instance_to_toml(&inst)?.as_bytes())?;
    m.write(&manifest)?;
    println!(
        "{}: {} jobs, {} tasks, {} stations, {} workers",
        a.out.display(),
        inst.jobs.len(),
        inst.task_count(),
        inst.stations.len(),
        inst.workers.len()
    );
    Ok(())
}

fn validate(a: &ValidateArgs) -> CmdResult {
    let inst = load(&a.instance)?;
    println!(
        "valid: {} jobs, {} tasks, {} stations, {} workers",
        inst.jobs.len(),
        inst.task_count(),
        inst.stations.len(),
        inst.workers.len()
    );
    Ok(())
}

fn policy_for(path: Option<&Path>, mode: PolicyMode) -> Result<Option<AgentPolicy>, Failure> {
    let Some(p) = path else { return Ok(None) };
    Ok(Some(AgentPolicy {
        net: read_policy(p)?,
        mode: match mode {
            PolicyMode::Sample => ActMode::Sample,
            PolicyMode::Greedy => ActMode::Greedy,
        },
    }))
}

fn curve_tsv(r: &SearchResult) -> String {
    let mut out = String::from("generation\tevaluations\tbest_z\tmean_z\n");
    for p in &r.progress {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", p.generation, p.evaluations, p.best_z, p.mean_z);
    }
    out
}

#[derive(Serialize)]
struct SolveMetrics {
    heuristic: Heuristic,
    seed: u64,
    makespan: f64,
    total_tardiness: f64,
    z: f64,
    evaluations: usize,
    generations: usize,
    baseline: drcsched::Baseline,
}

fn solve(command: &Command, a: &SolveArgs, snapshot: Option<&serde_json::Value>) -> CmdResult {
    let cfg: SearchConfig = resolve(snapshot, a.config.as_deref())?;
    let inst = load(&a.instance)?;
    let policy = policy_for(a.policy.as_deref(), a.policy_mode)?;
    if a.heuristic == Heuristic::GasaRl && policy.is_none() {
        return Err(Failure::usage("gasa-rl needs a policy checkpoint (--policy)"));
    }
    let mut m = ManifestBuilder::new(&a.out, command, json(&cfg)?);
    m.input(&a.instance)?;
    if let Some(p) = &a.policy {
        m.input(p)?;
    }
    let seeds: Vec<u64> = (a.first_seed..a.first_seed + a.seeds).collect();
    m.seeds(seeds.iter().copied());

    let mut summary = String::from("seed\tmakespan\ttotal_tardiness\tz\tevaluations\tgenerations\n");
    let mut timing = String::from("seed\twall_seconds\tseconds_per_iteration\n");
    let mut infeasible = Vec::new();
    for &seed in &seeds {
        let r = run_heuristic(
            &inst,
            a.heuristic,
            &cfg,
            a.budget,
            seed,
            a.parallelism,
            policy.as_ref().map(|p| p as &dyn PolicySource),
        )?;
        let violations = check_schedule_feasibility(&inst, &r.best_schedule);
        if !violations.is_empty() {
            infeasible.push((seed, violations));
        }
        let dir = PathBuf::from(format!("seed-{seed}"));
        m.artifact(dir.join("schedule.csv"), schedule_to_csv(&r.best_schedule)?.as_bytes())?;
        m.artifact(dir.join("gantt.json"), schedule_to_gantt(&inst, &r.best_schedule)?.as_bytes())?;
        m.artifact(dir.join("genome.json"), serde_json::to_string_pretty(&r.best_genome).map_err(Error::from)?.as_bytes())?;
        let metrics = SolveMetrics {
            heuristic: r.heuristic,
            seed,
            makespan: r.best_metrics.makespan,
            total_tardiness: r.best_metrics.total_tardiness,
            z: r.best_z,
            evaluations: r.evaluations,
            generations: r.progress.len(),
            baseline: r.baseline,
        };
        m.artifact(dir.join("metrics.json"), serde_json::to_string_pretty(&metrics).map_err(Error::from)?.as_bytes())?;
        m.artifact(dir.join("curve.tsv"), curve_tsv(&r).as_bytes())?;
        let _ = writeln!(
            summary,
            "{seed}\t{}\t{}\t{}\t{}\t{}",
            metrics.makespan, metrics.total_tardiness, metrics.z, metrics.evaluations, metrics.generations
        );
        let _ = writeln!(timing, "{seed}\t{}\t{}", r.wall_seconds, r.seconds_per_iteration());
        m.timing("search", r.wall_seconds);
        println!(
            "seed {seed}: makespan {} tardiness {} z {:.6} ({} evaluations)",
            metrics.makespan, metrics.total_tardiness, metrics.z, metrics.evaluations
        );
    }
    m.artifact("summary.tsv", summary.as_bytes())?;
    m.timing_file("timings.tsv", timing.as_bytes())?;
    m.write(&a.out.join(MANIFEST_FILE))?;
    if !infeasible.is_empty() {
        let mut msg = String::from("infeasible schedules:");
        for (seed, vs) in infeasible {
            for v in vs {
                let _ = write!(msg, "\n  seed {seed}: {v}");
            }
        }
        return Err(Failure {
            code: EXIT_INFEASIBLE,
            message: msg,
        });
    }
    Ok(())
}

fn train(command: &Command, a: &TrainArgs, snapshot: Option<&serde_json::Value>) -> CmdResult {
    let mut cfg: TrainerConfig = resolve(snapshot, a.config.as_deref())?;
    if snapshot.is_none() {
        if let Some(s) = a.steps {
            cfg.total_steps = s;
        }
    }
    let inst = load(&a.instance)?;
    let mut m = ManifestBuilder::new(&a.out, command, json(&cfg)?);
    m.input(&a.instance)?;
    m.seeds([a.seed]);
    let t = Instant::now();
    let tr = train_policy(&inst, &SearchConfig::default(), &cfg, NetShape::default(), a.warmup_generations, a.seed)?;
    m.timing("train", t.elapsed().as_secs_f64());

    let mut log = String::from(
        "update\tsteps\tepisodes\tlearning_rate\tloss\tpolicy_loss\tvalue_loss\tentropy\tmean_episode_reward\n",
    );
    for l in &tr.log {
        let _ = writeln!(
            log,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            l.update,
            l.steps,
            l.episodes,
            l.learning_rate,
            l.loss,
            l.policy_loss,
            l.value_loss,
            l.entropy,
            l.mean_episode_reward
        );
    }
    m.artifact("policy.bin", &save_policy(&tr.net))?;
    m.artifact("training_log.tsv", log.as_bytes())?;
    m.artifact(
        "warm_start.json",
        serde_json::to_string_pretty(&tr.start).map_err(Error::from)?.as_bytes(),
    )?;
    m.write(&a.out.join(MANIFEST_FILE))?;
    let last = tr.log.last().map_or(f64::NAN, |l| l.mean_episode_reward);
    println!(
        "trained {} updates, reward label {:.6}, final mean episode reward {last:.3}",
        tr.log.len(),
        tr.start.fit_label
    );
    Ok(())
}

fn bench(command: &Command, a: &BenchArgs, snapshot: Option<&serde_json::Value>) -> CmdResult {
    let cfg: SearchConfig = resolve(snapshot, a.config.as_deref())?;
    if a.parallelism.is_empty() || a.heuristics.is_empty() {
        return Err(Failure::usage("need at least one heuristic and one parallelism level"));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&a.datasets)
        .map_err(|e| Failure::usage(format!("{}: {e}", a.datasets.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::usage(format!("no instance files in {}", a.datasets.display())));
    }
    let policy = policy_for(a.policy.as_deref(), a.policy_mode)?;
    let mut m = ManifestBuilder::new(&a.out, command, json(&cfg)?);
    for f in &files {
        m.input(f)?;
    }
    if let Some(p) = &a.policy {
        m.input(p)?;
    }
    let seeds: Vec<u64> = (0..a.seeds).collect();
    m.seeds(seeds.iter().copied());

    let mut results: Vec<(String, SearchResult)> = Vec::new();
    let mut failures = String::from("dataset\theuristic\tseed\tparallelism\terror\n");
    let mut failed = 0;
    let mut rows = String::from("dataset\theuristic\tseed\tmakespan\ttotal_tardiness\tz\tevaluations\n");
    for f in &files {
        let name = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let inst = load(f)?;
        for &h in &a.heuristics {
            for (level, &par) in a.parallelism.iter().enumerate() {
                for &seed in &seeds {
                    let r = run_heuristic(&inst, h, &cfg, a.budget, seed, par, policy.as_ref().map(|p| p as &dyn PolicySource));
                    match r {
                        Ok(r) if level == 0 => {
                            let _ = writeln!(
                                rows,
                                "{name}\t{h}\t{seed}\t{}\t{}\t{}\t{}",
                                r.best_metrics.makespan, r.best_metrics.total_tardiness, r.best_z, r.evaluations
                            );
                            results.push((name.clone(), r));
                        }
                        Ok(r) => results.push((name.clone(), r)),
                        Err(e) => {
                            failed += 1;
                            eprintln!("warning: {name} {h} seed {seed} parallelism {par}: {e}");
                            let _ = writeln!(failures, "{name}\t{h}\t{seed}\t{par}\t{e}");
                        }
                    }
                }
            }
        }
    }
    if results.is_empty() {
        return Err(Failure::usage(format!("all {failed} runs failed")));
    }

    let first = a.parallelism[0];
    let quality: Vec<Run> = results
        .iter()
        .filter(|(_, r)| r.parallelism == first)
        .map(|(d, r)| Run { dataset: d, result: r })
        .collect();
    let timing: Vec<Run> = results.iter().map(|(d, r)| Run { dataset: d, result: r }).collect();
    // heuristics without results on some dataset cannot fill a table column
    let datasets: Vec<String> = files
        .iter()
        .map(|f| f.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .filter(|d| quality.iter().any(|r| r.dataset == d))
        .collect();
    let heuristics: Vec<Heuristic> = a
        .heuristics
        .iter()
        .copied()
        .filter(|&h| datasets.iter().all(|d| quality.iter().any(|r| r.dataset == d && r.result.heuristic == h)))
        .collect();
    let layout = ReportLayout {
        datasets,
        heuristics,
        min_runs: 1,
    };
    let quality: Vec<Run> = quality
        .into_iter()
        .filter(|r| layout.heuristics.contains(&r.result.heuristic) && layout.datasets.iter().any(|d| d == r.dataset))
        .collect();
    let report = build_report(&quality, &layout)?;
    let timing_report = build_report(&timing, &ReportLayout::default())?;

    m.artifact("results.tsv", rows.as_bytes())?;
    m.artifact("means.tsv", report.means_tsv().as_bytes())?;
    m.artifact("std.tsv", report.std_tsv().as_bytes())?;
    m.artifact("curves.tsv", report.curves_tsv().as_bytes())?;
    if failed > 0 {
        m.artifact("failures.tsv", failures.as_bytes())?;
    }
    m.timing_file("timing.tsv", timing_report.timing_tsv().as_bytes())?;
    m.timing("search", results.iter().map(|(_, r)| r.wall_seconds).sum());
    m.write(&a.out.join(MANIFEST_FILE))?;
    print!("{}", report.means_tsv());
    if failed > 0 {
        eprintln!("warning: {failed} runs failed, see failures.tsv");
    }
    Ok(())
}

fn check(a: &CheckArgs) -> CmdResult {
    let inst = load(&a.instance)?;
    let text = std::fs::read_to_string(&a.schedule).map_err(|e| Failure::usage(format!("{}: {e}", a.schedule.display())))?;
    let schedule = schedule_from_csv(&text)?;
    let violations = check_schedule_feasibility(&inst, &schedule);
    if violations.is_empty() {
        println!("feasible: {} operations", schedule.operations.len());
        return Ok(());
    }
    let mut msg = format!("infeasible: {} violations", violations.len());
    for v in &violations {
        let _ = write!(msg, "\n  {v}");
    }
    Err(Failure {
        code: EXIT_INFEASIBLE,
        message: msg,
    })
}

fn export_lp(command: &Command, a: &ExportLpArgs) -> CmdResult {
    let inst = load(&a.instance)?;
    let opts = LpOptions {
        baseline: if a.normalize { Some(reference_baseline(&inst)?) } else { None },
        max_variables: a.max_variables,
        hard_due_dates: a.hard_due_dates,
        pin: None,
    };
    let model = build_milp(&inst, &opts)?;
    let (root, name, manifest) = file_root(&a.out);
    let mut m = ManifestBuilder::new(&root, command, serde_json::json!({ "baseline": opts.baseline }));
    m.input(&a.instance)?;
    m.artifact(&name, model.to_lp_string().as_bytes())?;
    m.write(&manifest)?;
    println!(
        "{}: {} variables ({} binary), {} constraints",
        a.out.display(),
        model.variable_count(),
        model.binary_count(),
        model.rows.len()
    );
    Ok(())
}

/// Points every output path of `command` at `out`.
fn redirect(command: &Command, out: &Path) -> Result<Command, Failure> {
    let mut c = command.clone();
    let file = |p: &PathBuf| out.join(p.file_name().unwrap_or_default());
    match &mut c {
        Command::Generate(a) => a.out = file(&a.out),
        Command::ExportLp(a) => a.out = file(&a.out),
        Command::Solve(a) => a.out = out.to_path_buf(),
        Command::Train(a) => a.out = out.to_path_buf(),
        Command::Bench(a) => a.out = out.to_path_buf(),
        Command::Validate(_) | Command::Check(_) | Command::Replay(_) => {
            return Err(Failure::usage("manifest records a command without outputs"))
        }
    }
    Ok(c)
}

fn replay(a: &ReplayArgs) -> CmdResult {
    let original = read_manifest(&a.manifest)?;
    for input in &original.inputs {
        let now = sha256_file(&input.path).map_err(|e| Failure::usage(format!("{}: {e}", input.path.display())))?;
        if now != input.sha256 {
            return Err(Failure::usage(format!("input {} changed since the run", input.path.display())));
        }
    }
    let command = redirect(&original.command, &a.out)?;
    run(&command, Some(&original.config))?;
    let mut mismatched = Vec::new();
    for art in &original.artifacts {
        match sha256_file(&a.out.join(&art.path)) {
            Ok(h) if h == art.sha256 => {}
            _ => mismatched.push(art.path.display().to_string()),
        }
    }
    if mismatched.is_empty() {
        println!("reproduced {} artifacts", original.artifacts.len());
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_MISMATCH,
            message: format!("artifacts differ: {}", mismatched.join(", ")),
        })
    }
}

/// Makes every path in the command absolute so manifests stay valid from
/// any working directory.
pub fn absolutize(command: &mut Command) {
    let fix = |p: &mut PathBuf| *p = absolute(p);
    let fix_opt = |p: &mut Option<PathBuf>| {
        if let Some(x) = p {
            *x = absolute(x);
        }
    };
    match command {
        Command::Generate(a) => {
            fix_opt(&mut a.config);
            fix(&mut a.out);
        }
        Command::Validate(a) => fix(&mut a.instance),
        Command::Solve(a) => {
            fix(&mut a.instance);
            fix_opt(&mut a.policy);
            fix_opt(&mut a.config);
            fix(&mut a.out);
        }
        Command::Train(a) => {
            fix(&mut a.instance);
            fix_opt(&mut a.config);
            fix(&mut a.out);
        }
        Command::Bench(a) => {
            fix(&mut a.datasets);
            fix_opt(&mut a.policy);
            fix_opt(&mut a.config);
            fix(&mut a.out);
        }
        Command::Check(a) => {
            fix(&mut a.instance);
            fix(&mut a.schedule);
        }
        Command::ExportLp(a) => {
            fix(&mut a.instance);
            fix(&mut a.out);
        }
        Command::Replay(a) => {
            fix(&mut a.manifest);
            fix(&mut a.out);
        }
    }
}
