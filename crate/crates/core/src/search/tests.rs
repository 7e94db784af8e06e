use super::*;
use crate::dataio::{generate_instance, GeneratorConfig};
use crate::genome::DispatchRule;
use crate::instance::fixtures::*;
use crate::instance::{check_schedule_feasibility, TaskRef};
use crate::sim::{Decision, DecisionView};
use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

fn two_orders() -> ProblemInstance {
    // A: setup 2, processing 3, due 4. B: setup 1, processing 1.
    // A first: C = 7, T = 1. B first: C = 7, T = 3.
    instance(
        vec![
            job(vec![task(0.0, vec![alt(0, &[(0, 2.0)], &[(0, 3.0)])])], Some(4.0)),
            job(vec![task(0.0, vec![alt(0, &[(0, 1.0)], &[(0, 1.0)])])], None),
        ],
        vec![station(1, true)],
        1,
    )
}

#[test]
fn brute_force_on_two_orders() {
    let inst = two_orders();
    let b = Baseline {
        makespan: 7.0,
        tardiness: 1.0,
    };
    let o = brute_force(&inst, &b, 1_000_000).unwrap();
    assert_eq!(o.enumerated, 2);
    assert_eq!(o.metrics.makespan, 7.0);
    assert_eq!(o.metrics.total_tardiness, 1.0);
    assert!((o.z - 1.0).abs() < 1e-12);
    assert_eq!(o.priority[0], TaskRef::new(0, 0));
    assert!(check_schedule_feasibility(&inst, &o.schedule).is_empty());
}

#[test]
fn brute_force_single_task_is_unique_schedule() {
    let inst = single_task(1.0);
    let b = reference_baseline(&inst).unwrap();
    let o = brute_force(&inst, &b, 10).unwrap();
    assert_eq!(o.enumerated, 1);
    // setup [0, 2] ahead of the release, processing [2, 7]
    assert_eq!(o.metrics.makespan, 7.0);
}

#[test]
fn brute_force_cap_reports_size() {
    let inst = generate_instance(&GeneratorConfig::gbrt01(1)).unwrap();
    match brute_force(&inst, &reference_baseline(&inst).unwrap(), 1_000_000) {
        Err(Error::EnumerationCap { size, cap }) => {
            assert!(size > cap);
            assert_eq!(size, enumeration_size(&inst));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn dispatch_baseline_uses_one_evaluation() {
    let inst = generate_instance(&GeneratorConfig::gbrt01(2)).unwrap();
    for rule in [DispatchRule::Str, DispatchRule::Mtwr] {
        let r = run_dispatch_baseline(&inst, rule, &cfg()).unwrap();
        assert_eq!(r.evaluations, 1);
        assert_eq!(r.progress.len(), 1);
        assert!(r.best_genome.dispatching.iter().all(|d| d.rule == rule));
    }
    assert!(run_dispatch_baseline(&inst, DispatchRule::Spt, &cfg()).is_err());
}

#[test]
fn single_task_rules_agree() {
    let inst = single_task(0.0);
    let a = run_dispatch_baseline(&inst, DispatchRule::Str, &cfg()).unwrap();
    let b = run_dispatch_baseline(&inst, DispatchRule::Mtwr, &cfg()).unwrap();
    assert_eq!(a.best_schedule, b.best_schedule);
}

#[test]
fn ga_budget_and_curve_length() {
    let inst = generate_instance(&GeneratorConfig::gbrt02(5)).unwrap();
    let r = run_ga(&inst, &cfg(), 500, 5, 1).unwrap();
    assert_eq!(r.evaluations, 500);
    assert_eq!(r.progress.len(), GaConfig::default().expected_generations(500));
    assert_eq!(r.progress.len(), 24);
    assert_eq!(r.progress.last().unwrap().best_z, r.best_z);
}

#[test]
fn ga_rejects_small_budget() {
    let inst = single_task(0.0);
    assert!(matches!(
        run_ga(&inst, &cfg(), 49, 0, 1),
        Err(Error::BudgetTooSmall {
            budget: 49,
            population: 50
        })
    ));
}

#[test]
fn elitism_holds() {
    let inst = generate_instance(&GeneratorConfig::gbrt01(6)).unwrap();
    for r in [
        run_ga(&inst, &cfg(), 300, 6, 1).unwrap(),
        run_gasa(&inst, &cfg(), 300, 6, 1).unwrap(),
    ] {
        assert!(r.progress.windows(2).all(|w| w[1].best_z <= w[0].best_z));
        assert_eq!(r.evaluations, 300);
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let inst = generate_instance(&GeneratorConfig::gbrt01(7)).unwrap();
    let runs: Vec<SearchResult> = [1, 2, 4].iter().map(|&p| run_gasa(&inst, &cfg(), 200, 7, p).unwrap()).collect();
    for r in &runs[1..] {
        assert_eq!(r.best_z, runs[0].best_z);
        assert_eq!(r.best_genome, runs[0].best_genome);
        let za: Vec<f64> = r.progress.iter().map(|p| p.mean_z).collect();
        let zb: Vec<f64> = runs[0].progress.iter().map(|p| p.mean_z).collect();
        assert_eq!(za, zb);
    }
    let ts: Vec<f64> = [1, 3].iter().map(|&p| run_ts(&inst, None, &cfg(), 120, 7, p).unwrap().best_z).collect();
    assert_eq!(ts[0], ts[1]);
}

#[test]
fn gasa_without_annealing_is_ga() {
    let inst = generate_instance(&GeneratorConfig::gbrt02(8)).unwrap();
    let mut c = cfg();
    c.sa.probability = 0.0;
    let a = run_ga(&inst, &c, 250, 8, 1).unwrap();
    let b = run_gasa(&inst, &c, 250, 8, 1).unwrap();
    assert_eq!(a.best_z, b.best_z);
    assert_eq!(a.best_genome, b.best_genome);
    assert_eq!(a.progress.len(), b.progress.len());
}

struct Counting<'a>(&'a AtomicUsize);

impl PolicySource for Counting<'_> {
    fn decider(&self, _stream: u64) -> Box<dyn DecisionMaker + '_> {
        self.0.fetch_add(1, Ordering::Relaxed);
        Box::new(FollowGenome)
    }
}

#[test]
fn identity_policy_reproduces_gasa_and_counts_every_simulation() {
    let inst = generate_instance(&GeneratorConfig::gbrt01(9)).unwrap();
    let calls = AtomicUsize::new(0);
    let rl = run_gasa_rl(&inst, &cfg(), 230, 9, 2, &Counting(&calls)).unwrap();
    let plain = run_gasa(&inst, &cfg(), 230, 9, 1).unwrap();
    assert_eq!(calls.load(Ordering::Relaxed), rl.evaluations);
    assert_eq!(rl.evaluations, 230);
    assert_eq!(rl.best_z, plain.best_z);
    assert_eq!(rl.best_genome, plain.best_genome);
}

#[test]
fn rate_schedules_hit_endpoints() {
    let ga = GaConfig::default();
    let g = ga.expected_generations(500);
    let (pc, pm) = ga.rates(1, g);
    assert!((pc - 0.1).abs() < 1e-12 && (pm - 0.9).abs() < 1e-12);
    let (pc, pm) = ga.rates(g - 1, g);
    assert!((pc - 0.9).abs() < 1e-12 && (pm - 0.1).abs() < 1e-12);
    for gen in 1..g + 3 {
        let (pc, pm) = ga.rates(gen, g);
        assert!((0.0..=1.0).contains(&pc) && (0.0..=1.0).contains(&pm));
    }
}

#[test]
fn acceptance_limits() {
    assert_eq!(acceptance_probability(0.0, 1e-300), 1.0);
    assert_eq!(acceptance_probability(0.0, 0.0), 1.0);
    assert_eq!(acceptance_probability(-1.0, 5.0), 1.0);
    assert_eq!(acceptance_probability(0.1, 0.0), 0.0);
    assert_eq!(acceptance_probability(0.1, 1e-9), 0.0);
    assert!((acceptance_probability(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
}

fn rule_attr(station: usize) -> TabuAttr {
    TabuAttr::Rule {
        station,
        rule: DispatchRule::Spt,
    }
}

#[test]
fn tabu_fallback_evicts_oldest() {
    let mut tabu: VecDeque<TabuAttr> = [rule_attr(0), rule_attr(1), rule_attr(2)].into();
    let cands = [(5.0, rule_attr(1)), (3.0, rule_attr(2)), (4.0, rule_attr(0))];
    assert_eq!(tabu_select(&cands, &mut tabu, 1.0), Some(1));
    assert_eq!(tabu.len(), 2);
    assert_eq!(tabu[0], rule_attr(1));
}

#[test]
fn tabu_aspiration_admits_record_breaker() {
    let mut tabu: VecDeque<TabuAttr> = [rule_attr(0)].into();
    let cands = [(2.0, rule_attr(1)), (0.5, rule_attr(0))];
    assert_eq!(tabu_select(&cands, &mut tabu, 1.0), Some(1));
    assert_eq!(tabu.len(), 1);
    let cands = [(2.0, rule_attr(1)), (1.5, rule_attr(0))];
    assert_eq!(tabu_select(&cands, &mut tabu, 1.0), Some(0));
}

#[test]
fn trajectory_methods_never_end_above_start() {
    let inst = generate_instance(&GeneratorConfig::gbrt01(10)).unwrap();
    for r in [
        run_sars(&inst, None, &cfg(), 200, 10).unwrap(),
        run_ts(&inst, None, &cfg(), 200, 10, 1).unwrap(),
    ] {
        assert_eq!(r.evaluations, 200);
        assert!(r.best_z <= r.progress[0].best_z);
        assert!(r.progress.windows(2).all(|w| w[1].best_z <= w[0].best_z));
    }
}

#[test]
fn searches_reach_the_optimum_on_tiny_instances() {
    for seed in 0..6 {
        let inst = generate_instance(&GeneratorConfig::tiny(seed)).unwrap();
        let base = reference_baseline(&inst).unwrap();
        let c = SearchConfig {
            baseline: Some(base),
            ..cfg()
        };
        let opt = brute_force(&inst, &base, 1_000_000).unwrap().z;
        for r in [
            run_ga(&inst, &c, 500, seed, 1).unwrap(),
            run_gasa(&inst, &c, 500, seed, 1).unwrap(),
            run_ts(&inst, None, &c, 500, seed, 1).unwrap(),
        ] {
            assert!(r.best_z >= opt - 1e-9, "{} below oracle", r.heuristic);
        }
    }
}

#[test]
fn two_order_instance_is_solved_by_search() {
    let inst = two_orders();
    let base = reference_baseline(&inst).unwrap();
    let c = SearchConfig {
        baseline: Some(base),
        ..cfg()
    };
    let opt = brute_force(&inst, &base, 100).unwrap().z;
    assert!((run_ga(&inst, &c, 500, 1, 1).unwrap().best_z - opt).abs() < 1e-12);
    assert!((run_ts(&inst, None, &c, 500, 1, 1).unwrap().best_z - opt).abs() < 1e-12);
}

#[test]
fn heuristic_names_round_trip() {
    for h in Heuristic::ALL {
        assert_eq!(h.as_str().parse::<Heuristic>().unwrap(), h);
    }
    assert!("cplex".parse::<Heuristic>().is_err());
}

#[test]
fn gasa_rl_requires_policy() {
    let inst = single_task(0.0);
    assert!(matches!(
        run_heuristic(&inst, Heuristic::GasaRl, &cfg(), 500, 0, 1, None),
        Err(Error::Config(_))
    ));
}

struct AlwaysSpt;

impl DecisionMaker for AlwaysSpt {
    fn decide(&mut self, _: &DecisionView<'_>) -> Result<Decision> {
        Ok(Decision {
            rule: DispatchRule::Spt,
            flip: crate::sim::Flip::Station,
        })
    }
}

struct FlipPolicy;

impl PolicySource for FlipPolicy {
    fn decider(&self, _stream: u64) -> Box<dyn DecisionMaker + '_> {
        Box::new(AlwaysSpt)
    }
}

#[test]
fn flips_are_kept_in_result_genome() {
    let inst = generate_instance(&GeneratorConfig::gbrt02(11)).unwrap();
    let r = run_gasa_rl(&inst, &cfg(), 120, 11, 1, &FlipPolicy).unwrap();
    // replaying the result genome under the same policy reproduces its schedule
    let out = simulate_with(&inst, &r.best_genome, Some(&mut AlwaysSpt), &SimOptions::default()).unwrap();
    assert!(check_schedule_feasibility(&inst, &r.best_schedule).is_empty());
    assert!(out.metrics.makespan > 0.0);
}
