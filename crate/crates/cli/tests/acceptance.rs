//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use drcsched::agent::{
    final_reward, intermediate_reward, load_policy, ppo_loss, save_policy, train_policy, ActMode, AgentPolicy, LossCoefs,
    NetShape, PolicyNet, Sample, ThroughputBonus, TrainerConfig, Training,
};
use drcsched::dataio::{generate_instance, instance_from_toml, instance_to_toml, GeneratorConfig};
use drcsched::genome::{init_population, mutate};
use drcsched::instance::{Job, Station, TaskAlternative, TaskSpec, Worker, WorkerDuration};
use drcsched::rng::substream;
use drcsched::search::{brute_force, reference_baseline, run_heuristic, Heuristic, PolicySource, SearchConfig, SearchResult};
use drcsched::sim::{setup_duration, simulate, Flip, FEATURE_COUNT};
use drcsched::{check_schedule_feasibility, DispatchRule, ProblemInstance, TaskRef};
use rand::Rng;
use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

const TREND_SEEDS: u64 = 10;
const BUDGET: usize = 500;
const POLICY_SEED: u64 = 7;
const WARMUP_GENERATIONS: usize = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn preset(name: &str, seed: u64) -> ProblemInstance {
    generate_instance(&GeneratorConfig::preset(name, seed).unwrap()).unwrap()
}

fn train(inst: &ProblemInstance) -> Training {
    train_policy(
        inst,
        &SearchConfig::default(),
        &TrainerConfig::default(),
        NetShape::default(),
        WARMUP_GENERATIONS,
        POLICY_SEED,
    )
    .unwrap()
}

fn agent(net: &PolicyNet) -> AgentPolicy {
    AgentPolicy {
        net: net.clone(),
        mode: ActMode::Sample,
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn feasibility_closure() -> Outcome {
    let presets = ["tiny", "gbrt01", "gbrt02", "medium", "realworld"];
    let mut violations = 0;
    let mut pairs = 0;
    for i in 0..1000u64 {
        let inst = preset(presets[i as usize % presets.len()], i);
        let mut g = init_population(&inst, 1, i).unwrap().remove(0);
        let mut r = substream(i, &[0xACC]);
        for _ in 0..r.gen_range(0..20) {
            g = mutate(&g, &inst, &mut r).unwrap().0;
        }
        let out = simulate(&inst, &g).unwrap();
        violations += check_schedule_feasibility(&inst, &out.schedule).len();
        pairs += 1;
    }
    outcome(violations == 0, format!("{pairs} instance/genome pairs, {violations} violations"))
}

fn oracle_equivalence(policy: &AgentPolicy) -> Outcome {
    let mut hits: BTreeMap<Heuristic, usize> = BTreeMap::new();
    let mut below = 0;
    let n = 50;
    for seed in 0..n {
        let inst = preset("tiny", seed);
        let base = reference_baseline(&inst).unwrap();
        let opt = brute_force(&inst, &base, 1_000_000).unwrap();
        let cfg = SearchConfig {
            baseline: Some(base),
            ..Default::default()
        };
        for h in [Heuristic::Ga, Heuristic::Gasa, Heuristic::GasaRl] {
            let p = (h == Heuristic::GasaRl).then_some(policy as &dyn PolicySource);
            let r = run_heuristic(&inst, h, &cfg, BUDGET, seed, 1, p).unwrap();
            if r.best_z < opt.z - 1e-9 {
                below += 1;
            }
            if (r.best_z - opt.z).abs() <= 1e-9 {
                *hits.entry(h).or_default() += 1;
            }
        }
    }
    let need = (n as usize * 9).div_ceil(10);
    let pass = below == 0 && hits.len() == 3 && hits.values().all(|&k| k >= need);
    let counts: Vec<String> = hits.iter().map(|(h, k)| format!("{h} {k}/{n}")).collect();
    outcome(pass, format!("optimum matched: {}; below optimum: {below}", counts.join(", ")))
}

fn wd(worker: usize, duration: f64) -> WorkerDuration {
    WorkerDuration { worker, duration }
}

fn setup_exactness() -> Outcome {
    let alt = TaskAlternative {
        station: 0,
        automation: 1.0,
        setup: vec![wd(0, 4.0)],
        processing: vec![wd(0, 3.0)],
    };
    let job = |name: &str| Job {
        name: name.into(),
        tasks: vec![TaskSpec {
            release: 0.0,
            alternatives: vec![alt.clone()],
        }],
        due_date: None,
    };
    let (a, b) = (TaskRef::new(0, 0), TaskRef::new(1, 0));
    let mut details = Vec::new();
    let mut pass = true;
    for (s, expected) in [(-1.0, 0.0), (0.0, 4.0), (0.5, 6.0)] {
        let inst = ProblemInstance {
            name: "setup".into(),
            weights: Default::default(),
            jobs: vec![job("a"), job("b")],
            stations: vec![Station {
                name: "s".into(),
                slots: 1,
                requires_setup: true,
                sequence_factors: BTreeMap::from([((a, b), s)]),
            }],
            workers: vec![Worker::default()],
            job_precedence: Vec::new(),
        };
        let got = setup_duration(&inst, Some(a), b, 0, 0).unwrap();
        let first = setup_duration(&inst, None, b, 0, 0).unwrap();
        pass &= got == expected && first == 4.0;
        details.push(format!("s={s}: {got}"));
    }
    outcome(pass, format!("d=4, {}", details.join(", ")))
}

// feature positions the shaping reward reads
const STATION_WIP_REL: usize = 2;
const MEAN_WIP: usize = 4;
const WORKER_WIP_REL: usize = 5;
const COMPETING: usize = 7;
const SLOTS: usize = 8;
const MEAN_THROUGHPUT: usize = 11;
const MIN_SLACK: usize = 13;
const STATION_SLACK: usize = 14;
const MEAN_SLACK: usize = 15;

fn reward_suite() -> Outcome {
    // (flip, no competing task, station WIP above mean, worker WIP over slots) -> base reward
    #[rustfmt::skip]
    let base_table: [(Flip, bool, bool, bool, f64); 24] = [
        (Flip::Keep, false, false, false, 0.0), (Flip::Keep, false, false, true, 0.0),
        (Flip::Keep, false, true, false, 0.0), (Flip::Keep, false, true, true, 0.0),
        (Flip::Keep, true, false, false, 0.0), (Flip::Keep, true, false, true, 0.0),
        (Flip::Keep, true, true, false, 0.0), (Flip::Keep, true, true, true, 0.0),
        (Flip::Station, false, false, false, 0.0), (Flip::Station, false, false, true, 0.0),
        (Flip::Station, false, true, false, 2.0), (Flip::Station, false, true, true, 2.0),
        (Flip::Station, true, false, false, -3.0), (Flip::Station, true, false, true, -3.0),
        (Flip::Station, true, true, false, -3.0), (Flip::Station, true, true, true, -3.0),
        (Flip::Worker, false, false, false, 0.0), (Flip::Worker, false, false, true, 1.0),
        (Flip::Worker, false, true, false, 0.0), (Flip::Worker, false, true, true, 1.0),
        (Flip::Worker, true, false, false, 0.0), (Flip::Worker, true, false, true, 1.0),
        (Flip::Worker, true, true, false, 0.0), (Flip::Worker, true, true, true, 1.0),
    ];
    let mut rows = 0;
    let mut wrong = 0;
    for &(flip, idle, wip_above, worker_over, base) in &base_table {
        for rule in [DispatchRule::Spt, DispatchRule::Lpt, DispatchRule::Mtwr, DispatchRule::Str] {
            for slack_below in [false, true] {
                for tp_up in [false, true] {
                    for slack_positive in [false, true] {
                        let mut last = [0.0; FEATURE_COUNT];
                        let mut cur = [0.0; FEATURE_COUNT];
                        last[COMPETING] = if idle { 0.0 } else { 2.0 };
                        last[STATION_WIP_REL] = if wip_above { 3.0 } else { 1.0 };
                        last[MEAN_WIP] = 2.0;
                        last[SLOTS] = 2.0;
                        last[WORKER_WIP_REL] = if worker_over { 5.0 } else { 2.0 };
                        last[MEAN_SLACK] = 10.0;
                        last[STATION_SLACK] = if slack_below { 4.0 } else { 10.0 };
                        last[MEAN_THROUGHPUT] = 0.5;
                        cur[MEAN_THROUGHPUT] = if tp_up { 0.75 } else { 0.5 };
                        cur[MIN_SLACK] = if slack_positive { 1.0 } else { -1.0 };
                        let mut expected = base;
                        if rule == DispatchRule::Str && slack_below {
                            expected += 1.0;
                        }
                        if tp_up {
                            expected += 3.0;
                        }
                        if slack_positive {
                            expected += 3.0;
                        }
                        rows += 1;
                        if intermediate_reward(&last, &cur, rule, flip, ThroughputBonus::Improved) != expected {
                            wrong += 1;
                        }
                    }
                }
            }
        }
    }
    // worker flip on a station without slots never earns the worker bonus
    let mut last = [0.0; FEATURE_COUNT];
    last[WORKER_WIP_REL] = 5.0;
    rows += 1;
    if intermediate_reward(&last, &last, DispatchRule::Spt, Flip::Worker, ThroughputBonus::Improved) != 0.0 {
        wrong += 1;
    }
    // the from-zero bonus needs a zero starting throughput
    let mut cur = [0.0; FEATURE_COUNT];
    cur[MEAN_THROUGHPUT] = 0.25;
    let zero = [0.0; FEATURE_COUNT];
    let mut half = zero;
    half[MEAN_THROUGHPUT] = 0.125;
    for (l, expected) in [(&zero, 3.0), (&half, 0.0)] {
        rows += 1;
        if intermediate_reward(l, &cur, DispatchRule::Spt, Flip::Keep, ThroughputBonus::FromZero) != expected {
            wrong += 1;
        }
    }

    let finals = [
        (0.75, 0.5, 4, 80.0),
        (0.5, 0.75, 3, -45.0),
        (0.5, 0.5, 9, 0.0),
        (0.625, 0.5, 0, 0.0),
        (1.0, 0.5, 1, 10.0),
        (1.0, 0.5, 2, 40.0),
        (1.0, 0.5, 8, 640.0),
    ];
    let final_wrong = finals
        .iter()
        .filter(|&&(label, got, steps, expected)| final_reward(label, got, steps) != expected)
        .count();
    let quadratic = (1..50).all(|s| final_reward(0.75, 0.5, 2 * s) == 4.0 * final_reward(0.75, 0.5, s));
    outcome(
        wrong == 0 && final_wrong == 0 && quadratic,
        format!(
            "{rows} shaping cases, {wrong} wrong; {} final-reward cases, {final_wrong} wrong; 20*s^2 scaling {}",
            finals.len(),
            if quadratic { "holds" } else { "broken" }
        ),
    )
}

fn gradient_check() -> Outcome {
    let mut net = PolicyNet::new(NetShape::micro(4), 5).unwrap();
    let mut r = substream(5, &[0x6C]);
    for p in &mut net.params {
        *p += r.gen_range(-0.3..0.3);
    }
    let ratios = [0.5, 1.0, 1.6, 0.9, 1.3, 0.7];
    let batch: Vec<Sample> = (0..6)
        .map(|i| {
            let input: Vec<f64> = (0..4).map(|_| r.gen_range(-2.0..2.0)).collect();
            let f = net.forward(&input);
            let (l1, l2) = net.log_probs(&f);
            let (rule, flip) = (i % 4, i % 3);
            Sample {
                old_log_prob: l1[rule] + l2[flip] - f64::ln(ratios[i]),
                advantage: if i % 2 == 0 { 1.3 } else { -0.7 },
                ret: r.gen_range(-1.0..1.0),
                input,
                rule,
                flip,
            }
        })
        .collect();
    let parts = [
        ("policy", LossCoefs { clip_ratio: 0.2, value_coef: 0.0, entropy_coef: 0.0 }),
        ("value", LossCoefs { clip_ratio: 0.2, value_coef: 1.0, entropy_coef: 0.0 }),
        ("full", LossCoefs { clip_ratio: 0.2, value_coef: 0.5, entropy_coef: 0.01 }),
    ];
    let h = 1e-5;
    let mut worst_all: f64 = 0.0;
    let mut details = Vec::new();
    for (name, coefs) in parts {
        let mut grad = vec![0.0; net.params.len()];
        ppo_loss(&net, &batch, &coefs, Some(&mut grad));
        let mut worst: f64 = 0.0;
        for i in 0..net.params.len() {
            let mut a = net.clone();
            a.params[i] += h;
            let mut b = net.clone();
            b.params[i] -= h;
            let fd = (ppo_loss(&a, &batch, &coefs, None).total - ppo_loss(&b, &batch, &coefs, None).total) / (2.0 * h);
            let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
            worst = worst.max(rel);
        }
        worst_all = worst_all.max(worst);
        details.push(format!("{name} {worst:.1e}"));
    }
    outcome(
        worst_all < 1e-4,
        format!("{} parameters, worst relative error: {}", net.params.len(), details.join(", ")),
    )
}

fn training_signal(t: &Training) -> Outcome {
    let n = t.log.len();
    let k = (n / 10).max(1);
    let first = mean(t.log[..k].iter().map(|l| l.mean_episode_reward));
    let last = mean(t.log[n - k..].iter().map(|l| l.mean_episode_reward));
    let finite = t.log.iter().all(|l| l.loss.is_finite());
    let steps = t.log.last().map_or(0, |l| l.steps);
    outcome(
        last > first && finite && steps >= 30_000,
        format!(
            "{steps} steps, {n} updates; mean episode reward first 10% {first:.3}, last 10% {last:.3}; loss finite: {finite}"
        ),
    )
}

struct Trend {
    name: String,
    runs: BTreeMap<Heuristic, Vec<SearchResult>>,
}

const TREND_HEURISTICS: [Heuristic; 7] = [
    Heuristic::Str,
    Heuristic::Mtwr,
    Heuristic::Ts,
    Heuristic::Sars,
    Heuristic::Ga,
    Heuristic::Gasa,
    Heuristic::GasaRl,
];

fn trend_runs(name: &str, inst: &ProblemInstance, policy: &AgentPolicy) -> Trend {
    let cfg = SearchConfig {
        baseline: Some(reference_baseline(inst).unwrap()),
        ..Default::default()
    };
    let mut runs = BTreeMap::new();
    for h in TREND_HEURISTICS {
        let p = (h == Heuristic::GasaRl).then_some(policy as &dyn PolicySource);
        let rs = (0..TREND_SEEDS)
            .map(|seed| run_heuristic(inst, h, &cfg, BUDGET, seed, 1, p).unwrap())
            .collect();
        runs.insert(h, rs);
    }
    Trend { name: name.into(), runs }
}

impl Trend {
    fn mean_z(&self, h: Heuristic) -> f64 {
        mean(self.runs[&h].iter().map(|r| r.best_z))
    }

    fn z_at(&self, h: Heuristic, generation: usize) -> f64 {
        mean(self.runs[&h].iter().map(|r| {
            let p = r.progress.iter().find(|p| p.generation == generation).or(r.progress.last()).unwrap();
            p.best_z
        }))
    }
}

fn ordering(trends: &[Trend]) -> Outcome {
    let pooled = |h: Heuristic| mean(trends.iter().map(|t| t.mean_z(h)));
    let z: BTreeMap<Heuristic, f64> = TREND_HEURISTICS.iter().map(|&h| (h, pooled(h))).collect();
    let dispatch_min = z[&Heuristic::Str].min(z[&Heuristic::Mtwr]);
    let traj_max = z[&Heuristic::Ts].max(z[&Heuristic::Sars]);
    let traj_min = z[&Heuristic::Ts].min(z[&Heuristic::Sars]);
    let links = [
        ("dispatching > trajectory", dispatch_min > traj_max),
        ("trajectory > GA", traj_min > z[&Heuristic::Ga]),
        ("GA >= GASA", z[&Heuristic::Ga] >= z[&Heuristic::Gasa]),
        ("GASA >= GASA+RL", z[&Heuristic::Gasa] >= z[&Heuristic::GasaRl]),
    ];
    let rl_wins = trends
        .iter()
        .filter(|t| t.mean_z(Heuristic::GasaRl) <= t.mean_z(Heuristic::Gasa))
        .count();
    let mut detail = String::from("pooled mean Z");
    for (h, v) in &z {
        detail += &format!(" {h} {v:.4}");
    }
    let broken: Vec<&str> = links.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if broken.is_empty() {
        detail += "; chain holds";
    } else {
        detail += &format!("; broken: {}", broken.join(", "));
    }
    detail += &format!("; GASA+RL <= GASA on {rl_wins}/{} instances", trends.len());
    outcome(broken.is_empty() && rl_wins >= 2, detail)
}

fn early_dominance(trends: &[Trend]) -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for t in trends {
        let rl = t.z_at(Heuristic::GasaRl, 10);
        let gasa = t.z_at(Heuristic::Gasa, 10);
        if rl <= gasa {
            wins += 1;
        }
        parts.push(format!("{} {rl:.4} vs {gasa:.4}", t.name));
    }
    outcome(
        wins >= 2,
        format!("generation-10 mean best Z (GASA+RL vs GASA): {}; {wins}/{} instances", parts.join(", "), trends.len()),
    )
}

fn parallel_invariance(inst: &ProblemInstance, policy: &AgentPolicy) -> Outcome {
    let cfg = SearchConfig::default();
    let mut mismatches = Vec::new();
    let mut ga_seconds = BTreeMap::new();
    for h in [Heuristic::Ga, Heuristic::Gasa, Heuristic::GasaRl, Heuristic::Ts, Heuristic::Sars] {
        let p = (h == Heuristic::GasaRl).then_some(policy as &dyn PolicySource);
        let runs: Vec<SearchResult> = [1, 2, 4]
            .into_iter()
            .map(|par| run_heuristic(inst, h, &cfg, BUDGET, 3, par, p).unwrap())
            .collect();
        if runs.iter().any(|r| r.best_z != runs[0].best_z || r.best_genome != runs[0].best_genome) {
            mismatches.push(h.to_string());
        }
        if h == Heuristic::Ga {
            for r in &runs {
                ga_seconds.insert(r.parallelism, r.seconds_per_iteration());
            }
        }
    }
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let invariant = mismatches.is_empty();
    let mut detail = format!(
        "{} tasks; best Z identical across parallelism 1/2/4: {}",
        inst.task_count(),
        if invariant { "yes".to_string() } else { format!("no ({})", mismatches.join(", ")) }
    );
    let speedup_ok = if cores >= 4 {
        let ratio = ga_seconds[&4] / ga_seconds[&1];
        detail += &format!("; GA time per generation at 4 / at 1 = {ratio:.2}");
        ratio <= 0.6
    } else {
        detail += &format!("; speedup not measured: {cores} core(s) available, needs 4");
        true
    };
    outcome(invariant && speedup_ok, detail)
}

fn littles_law() -> Outcome {
    let jobs = (0..40)
        .map(|i| Job {
            name: format!("j{i}"),
            tasks: vec![TaskSpec {
                release: i as f64 * 3.5,
                alternatives: vec![TaskAlternative {
                    station: 0,
                    automation: 1.0,
                    setup: Vec::new(),
                    processing: vec![wd(0, 2.0 + (i % 3) as f64)],
                }],
            }],
            due_date: None,
        })
        .collect();
    let inst = ProblemInstance {
        name: "stream".into(),
        weights: Default::default(),
        jobs,
        stations: vec![Station {
            name: "s".into(),
            slots: 1,
            requires_setup: false,
            sequence_factors: BTreeMap::new(),
        }],
        workers: vec![Worker::default()],
        job_precedence: Vec::new(),
    };
    let g = init_population(&inst, 1, 0).unwrap().remove(0);
    let out = simulate(&inst, &g).unwrap();
    let s = &out.metrics.stations[0];
    let rhs = s.throughput * s.mean_flow_time;
    let rel = (s.mean_wip - rhs).abs() / rhs;
    outcome(
        rel <= 0.05,
        format!(
            "WIP {:.4}, throughput x flow time {:.4} x {:.4} = {rhs:.4}, relative gap {rel:.4}",
            s.mean_wip, s.throughput, s.mean_flow_time
        ),
    )
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_drcsched")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn round_trips(policy: &PolicyNet) -> Outcome {
    let mut problems = Vec::new();
    for (i, name) in ["tiny", "gbrt01", "gbrt02", "realworld", "medium"].iter().enumerate() {
        let inst = preset(name, i as u64);
        if instance_from_toml(&instance_to_toml(&inst).unwrap()).unwrap() != inst {
            problems.push(format!("{name} instance"));
        }
    }
    let back = load_policy(&save_policy(policy)).unwrap();
    if back != *policy || save_policy(&back) != save_policy(policy) {
        problems.push("policy".into());
    }

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");
    std::fs::create_dir(&data).unwrap();
    let inst = data.join("g1.toml");
    let pol = d.join("policy.bin");
    std::fs::write(&pol, save_policy(policy)).unwrap();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("generate", vec!["generate".into(), "--preset".into(), "gbrt01".into(), "--seed".into(), "4".into(), "--out".into(), s(&inst).into()]),
        ("solve gasa-rl", vec!["solve".into(), "--instance".into(), s(&inst).into(), "--heuristic".into(), "gasa-rl".into(), "--seeds".into(), "2".into(), "--policy".into(), s(&pol).into(), "--parallelism".into(), "2".into(), "--out".into(), s(&d.join("solve")).into()]),
        ("solve ts", vec!["solve".into(), "--instance".into(), s(&inst).into(), "--heuristic".into(), "ts".into(), "--out".into(), s(&d.join("ts")).into()]),
        ("train", vec!["train".into(), "--instance".into(), s(&inst).into(), "--steps".into(), "2048".into(), "--warmup-generations".into(), "2".into(), "--out".into(), s(&d.join("train")).into()]),
        ("bench", vec!["bench".into(), "--datasets".into(), s(&data).into(), "--heuristics".into(), "mtwr,sars,gasa".into(), "--seeds".into(), "2".into(), "--budget".into(), "100".into(), "--parallelism".into(), "1,2".into(), "--out".into(), s(&d.join("bench")).into()]),
        ("export-lp", vec!["export-lp".into(), "--instance".into(), s(&inst).into(), "--normalize".into(), "--out".into(), s(&d.join("model.lp")).into()]),
    ];
    let manifests = [
        data.join("g1.toml.manifest.json"),
        d.join("solve/manifest.json"),
        d.join("ts/manifest.json"),
        d.join("train/manifest.json"),
        d.join("bench/manifest.json"),
        d.join("model.lp.manifest.json"),
    ];
    let mut replayed = 0;
    for (i, ((name, args), manifest)) in runs.iter().zip(&manifests).enumerate() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = cli(&args);
        if !o.status.success() {
            problems.push(format!("{name} failed: {}", String::from_utf8_lossy(&o.stderr).trim()));
            continue;
        }
        if i == 0 {
            // keep the bench dataset directory free of non-instance files
            let moved = d.join("g1.toml.manifest.json");
            std::fs::rename(manifest, &moved).unwrap();
            let o = cli(&["replay", "--manifest", s(&moved), "--out", s(&d.join("replay-0"))]);
            if o.status.success() {
                replayed += 1;
            } else {
                problems.push(format!("{name} replay: {}", String::from_utf8_lossy(&o.stderr).trim()));
            }
            continue;
        }
        let o = cli(&["replay", "--manifest", s(manifest), "--out", s(&d.join(format!("replay-{i}")))]);
        if o.status.success() {
            replayed += 1;
        } else {
            problems.push(format!("{name} replay: {}", String::from_utf8_lossy(&o.stderr).trim()));
        }
    }
    let detail = format!(
        "5 instance presets and a policy round-trip; {replayed}/{} CLI runs reproduced byte for byte{}",
        runs.len(),
        if problems.is_empty() { String::new() } else { format!("; problems: {}", problems.join("; ")) }
    );
    outcome(problems.is_empty(), detail)
}

fn main() {
    // cargo passes harness flags such as --nocapture or a filter; a filter
    // that names nothing here skips the suite
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let suite = Instant::now();
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut report = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} [{id:>2}] {name}: {} ({secs:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o, secs));
    };

    let instances = [("gbrt01", preset("gbrt01", 11)), ("gbrt02", preset("gbrt02", 12)), ("medium", preset("medium", 13))];
    let mut trained: Vec<Training> = Vec::new();
    let t = Instant::now();
    for (_, inst) in &instances {
        trained.push(train(inst));
    }
    println!("trained {} policies ({:.1}s)", trained.len(), t.elapsed().as_secs_f64());
    let policies: Vec<AgentPolicy> = trained.iter().map(|t| agent(&t.net)).collect();

    report(1, "feasibility closure", &mut feasibility_closure);
    report(2, "oracle equivalence", &mut || oracle_equivalence(&policies[0]));
    report(3, "setup model exactness", &mut setup_exactness);
    report(4, "reward functions", &mut reward_suite);
    report(5, "gradient correctness", &mut gradient_check);
    report(6, "training signal", &mut || training_signal(&trained[0]));
    let mut trends = Vec::new();
    let t = Instant::now();
    for ((name, inst), p) in instances.iter().zip(&policies) {
        trends.push(trend_runs(name, inst, p));
    }
    let trend_secs = t.elapsed().as_secs_f64();
    for tr in &trends {
        let mut line = format!("  {}:", tr.name);
        for h in TREND_HEURISTICS {
            line += &format!(" {h} {:.4}", tr.mean_z(h));
        }
        println!("{line}");
    }
    println!("  trend runs took {trend_secs:.1}s");
    report(7, "heuristic ordering", &mut || ordering(&trends));
    report(8, "early-generation dominance", &mut || early_dominance(&trends));
    report(9, "parallel invariance", &mut || parallel_invariance(&instances[2].1, &policies[2]));
    report(10, "Little's law", &mut littles_law);
    report(11, "round trips and replay", &mut || round_trips(&trained[0].net));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        suite.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
