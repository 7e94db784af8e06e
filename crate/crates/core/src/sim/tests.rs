use super::*;
use crate::genome::init_population;
use crate::instance::check_schedule_feasibility;
use crate::instance::fixtures::*;

struct Scripted {
    decision: Decision,
    seen: Vec<[f64; FEATURE_COUNT]>,
}

impl Scripted {
    fn new(rule: DispatchRule, flip: Flip) -> Self {
        Self {
            decision: Decision { rule, flip },
            seen: Vec::new(),
        }
    }
}

impl DecisionMaker for Scripted {
    fn decide(&mut self, view: &DecisionView<'_>) -> Result<Decision> {
        self.seen.push(*view.features);
        Ok(self.decision)
    }
}

fn only_genome(inst: &ProblemInstance) -> Genome {
    init_population(inst, 1, 0).unwrap().remove(0)
}

fn ops_of(out: &SimOutcome, t: TaskRef) -> (Option<(f64, f64)>, (f64, f64)) {
    let s = out.schedule.find(t, OpKind::Setup).map(|o| (o.start, o.end));
    let p = out.schedule.find(t, OpKind::Processing).unwrap();
    (s, (p.start, p.end))
}

#[test]
fn single_task_is_set_up_then_processed() {
    let inst = single_task(0.0);
    let out = simulate(&inst, &only_genome(&inst)).unwrap();
    assert_eq!(ops_of(&out, TaskRef::new(0, 0)), (Some((0.0, 2.0)), (2.0, 7.0)));
    assert_eq!(out.metrics.makespan, 7.0);
    assert!(check_schedule_feasibility(&inst, &out.schedule).is_empty());
}

#[test]
fn setup_is_left_shifted_before_release() {
    let inst = single_task(10.0);
    let out = simulate(&inst, &only_genome(&inst)).unwrap();
    assert_eq!(ops_of(&out, TaskRef::new(0, 0)), (Some((0.0, 2.0)), (10.0, 15.0)));
    assert_eq!(out.metrics.makespan, 15.0);
}

fn two_stations_one_worker(u: f64) -> ProblemInstance {
    let t = |k| {
        let mut a = alt(k, &[], &[(0, 4.0)]);
        a.automation = u;
        task(0.0, vec![a])
    };
    instance(
        vec![job(vec![t(0)], None), job(vec![t(1)], None)],
        vec![station(1, false), station(1, false)],
        1,
    )
}

#[test]
fn partially_automated_operations_share_a_worker() {
    let inst = two_stations_one_worker(0.5);
    let out = simulate(&inst, &only_genome(&inst)).unwrap();
    assert_eq!(ops_of(&out, TaskRef::new(0, 0)).1, (0.0, 4.0));
    assert_eq!(ops_of(&out, TaskRef::new(1, 0)).1, (0.0, 4.0));
    assert!(check_schedule_feasibility(&inst, &out.schedule).is_empty());
}

#[test]
fn full_attention_operations_are_serialized() {
    let inst = two_stations_one_worker(1.0);
    let out = simulate(&inst, &only_genome(&inst)).unwrap();
    assert_eq!(out.metrics.makespan, 8.0);
    assert!(check_schedule_feasibility(&inst, &out.schedule).is_empty());
}

#[test]
fn sequence_factor_shortens_following_setup() {
    let t = || task(0.0, vec![alt(0, &[(0, 10.0)], &[(0, 1.0)])]);
    let mut inst = instance(vec![job(vec![t()], None), job(vec![t()], None)], vec![station(1, true)], 1);
    let (a, b) = (TaskRef::new(0, 0), TaskRef::new(1, 0));
    inst.stations[0].sequence_factors.insert((a, b), -0.5);
    let mut g = only_genome(&inst);
    g.dispatching[0].rule = DispatchRule::Fifo;
    let out = simulate(&inst, &g).unwrap();
    assert_eq!(ops_of(&out, b).0, Some((11.0, 16.0)));
    assert!(check_schedule_feasibility(&inst, &out.schedule).is_empty());
}

#[test]
fn forced_priority_overrides_rules() {
    let t = |d| task(0.0, vec![alt(0, &[], &[(0, d)])]);
    let inst = instance(vec![job(vec![t(1.0)], None), job(vec![t(5.0)], None)], vec![station(1, false)], 1);
    let mut g = only_genome(&inst);
    g.dispatching[0].rule = DispatchRule::Spt;
    let opts = SimOptions {
        forced_priority: Some(vec![TaskRef::new(1, 0), TaskRef::new(0, 0)]),
        ..Default::default()
    };
    let out = simulate_with(&inst, &g, None, &opts).unwrap();
    assert_eq!(out.schedule.operations[0].task, TaskRef::new(1, 0));
}

fn competing(n_stations: usize) -> ProblemInstance {
    let t = |d| {
        task(
            0.0,
            (0..n_stations).map(|k| alt(k, &[], &[(0, d), (1, d)])).collect(),
        )
    };
    instance(
        vec![job(vec![t(3.0)], None), job(vec![t(2.0)], None)],
        (0..n_stations).map(|_| station(1, false)).collect(),
        2,
    )
}

fn all_on_station_zero(inst: &ProblemInstance) -> Genome {
    let mut g = only_genome(inst);
    for gene in &mut g.allocation {
        gene.station = 0;
        gene.processing_worker = 0;
    }
    g
}

#[test]
fn competing_flag_and_initial_throughput() {
    let inst = competing(1);
    let g = all_on_station_zero(&inst);
    let mut d = Scripted::new(DispatchRule::Spt, Flip::Keep);
    simulate_with(&inst, &g, Some(&mut d), &SimOptions::default()).unwrap();
    // first decision: two processable tasks at clock 0
    assert_eq!(d.seen[0][7], 1.0);
    assert!(d.seen[0][9..13].iter().all(|&x| x == 0.0));
    // second decision: one task left
    assert_eq!(d.seen[1][7], 0.0);
}

#[test]
fn keep_flip_leaves_genome_alone() {
    let inst = competing(2);
    let g = all_on_station_zero(&inst);
    let mut d = Scripted::new(DispatchRule::Spt, Flip::Keep);
    let out = simulate_with(&inst, &g, Some(&mut d), &SimOptions::default()).unwrap();
    assert_eq!(out.genome, g);
}

#[test]
fn station_flip_without_alternative_degrades() {
    let inst = competing(1);
    let g = all_on_station_zero(&inst);
    let mut d = Scripted::new(DispatchRule::Spt, Flip::Station);
    let out = simulate_with(&inst, &g, Some(&mut d), &SimOptions::default()).unwrap();
    assert!(out.decisions.iter().all(|p| p.applied_flip == Flip::Keep));
    assert_eq!(out.genome, g);
}

#[test]
fn station_flip_moves_second_task() {
    let inst = competing(2);
    let g = all_on_station_zero(&inst);
    let mut d = Scripted::new(DispatchRule::Spt, Flip::Station);
    let out = simulate_with(&inst, &g, Some(&mut d), &SimOptions::default()).unwrap();
    assert_eq!(out.decisions[0].applied_flip, Flip::Station);
    // SPT ranks job 1 (d=2) first, so job 0 moves to station 1
    assert_eq!(out.genome.gene(TaskRef::new(0, 0)).unwrap().station, 1);
    assert_eq!(out.genome.gene(TaskRef::new(1, 0)).unwrap().station, 0);
    assert!(check_schedule_feasibility(&inst, &out.schedule).is_empty());
    out.genome.validate(&inst).unwrap();
}

#[test]
fn worker_flip_reassigns_first_task() {
    let inst = competing(1);
    let g = all_on_station_zero(&inst);
    let mut d = Scripted::new(DispatchRule::Spt, Flip::Worker);
    let out = simulate_with(&inst, &g, Some(&mut d), &SimOptions::default()).unwrap();
    assert_eq!(out.decisions[0].applied_flip, Flip::Worker);
    assert_eq!(out.genome.gene(TaskRef::new(1, 0)).unwrap().processing_worker, 1);
    assert!(check_schedule_feasibility(&inst, &out.schedule).is_empty());
}

#[test]
fn littles_law_on_single_station_stream() {
    let jobs = (0..20)
        .map(|i| job(vec![task(i as f64 * 2.5, vec![alt(0, &[], &[(0, 2.0 + (i % 3) as f64)])])], None))
        .collect();
    let inst = instance(jobs, vec![station(1, false)], 1);
    let out = simulate(&inst, &only_genome(&inst)).unwrap();
    let s = &out.metrics.stations[0];
    let rhs = s.throughput * s.mean_flow_time;
    assert!((s.mean_wip - rhs).abs() <= 0.05 * rhs, "{} vs {}", s.mean_wip, rhs);
}

#[test]
fn decoding_is_deterministic_and_complete() {
    let inst = competing(2);
    let g = init_population(&inst, 4, 8).unwrap();
    for genome in &g {
        let a = simulate(&inst, genome).unwrap();
        let b = simulate(&inst, genome).unwrap();
        assert_eq!(a.schedule, b.schedule);
        assert_eq!(a.schedule.operations.len(), 2);
    }
}

#[test]
fn trace_records_every_phase() {
    let inst = single_task(0.0);
    let opts = SimOptions {
        record_trace: true,
        ..Default::default()
    };
    let out = simulate_with(&inst, &only_genome(&inst), None, &opts).unwrap();
    let phases: Vec<TracePhase> = out.trace.iter().map(|e| e.phase).collect();
    assert_eq!(
        phases,
        vec![
            TracePhase::Dispatch,
            TracePhase::SetupStart,
            TracePhase::SetupEnd,
            TracePhase::ProcessingStart,
            TracePhase::ProcessingEnd
        ]
    );
}
