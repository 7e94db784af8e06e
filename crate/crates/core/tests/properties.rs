use drcsched::dataio::{generate_instance, instance_from_toml, instance_to_toml, schedule_from_csv, schedule_to_csv, GeneratorConfig};
use drcsched::genome::{init_population, mutate};
use drcsched::rng::substream;
use drcsched::search::{brute_force, reference_baseline, run_heuristic, Heuristic, SearchConfig};
use drcsched::sim::{simulate, simulate_with, Decision, DecisionMaker, DecisionView, Flip, SimOptions};
use drcsched::{check_schedule_feasibility, validate_instance, OpKind, ProblemInstance, Result};
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeMap;

fn small_config(seed: u64, jobs: usize, stations: usize, workers: usize, density: f64, prec: f64, slots: usize) -> GeneratorConfig {
    let mut c = GeneratorConfig::gbrt01(seed);
    c.jobs = jobs;
    c.total_tasks = None;
    c.tasks_per_job = (1, 3);
    c.stations = stations;
    c.workers = workers;
    c.slots = (1, slots);
    c.station_density = density;
    c.capability_density = density;
    c.precedence_probability = prec;
    c.setup_station_share = 0.5;
    c.automation = (0.3, 1.0);
    c
}

/// Picks rules and flips at random.
struct Chaos(drcsched::rng::Rng);

impl DecisionMaker for Chaos {
    fn decide(&mut self, _: &DecisionView<'_>) -> Result<Decision> {
        let rules = [
            drcsched::DispatchRule::Spt,
            drcsched::DispatchRule::Lpt,
            drcsched::DispatchRule::Mtwr,
            drcsched::DispatchRule::Str,
        ];
        Ok(Decision {
            rule: rules[self.0.gen_range(0..4)],
            flip: Flip::ALL[self.0.gen_range(0..3)],
        })
    }
}

fn assert_complete(inst: &ProblemInstance, schedule: &drcsched::Schedule) {
    let mut seen = BTreeMap::new();
    for op in &schedule.operations {
        *seen.entry((op.task, op.kind)).or_insert(0) += 1;
    }
    for t in inst.tasks() {
        assert_eq!(seen.get(&(t, OpKind::Processing)), Some(&1), "processing of {t}");
        let station = schedule.find(t, OpKind::Processing).unwrap().station;
        let setups = seen.get(&(t, OpKind::Setup)).copied().unwrap_or(0);
        assert_eq!(setups, usize::from(inst.needs_setup(station)), "setup of {t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decoded_schedules_are_feasible_and_complete(
        seed in any::<u64>(),
        jobs in 1usize..6,
        stations in 1usize..4,
        workers in 1usize..4,
        density in 0.2f64..1.0,
        prec in 0.0f64..1.0,
        slots in 1usize..3,
        mutations in 0usize..6,
        with_policy in any::<bool>(),
    ) {
        let inst = generate_instance(&small_config(seed, jobs, stations, workers, density, prec, slots)).unwrap();
        let mut g = init_population(&inst, 1, seed).unwrap().remove(0);
        let mut r = substream(seed, &[1]);
        for _ in 0..mutations {
            g = mutate(&g, &inst, &mut r).unwrap().0;
        }
        let out = if with_policy {
            let mut chaos = Chaos(substream(seed, &[2]));
            simulate_with(&inst, &g, Some(&mut chaos), &SimOptions::default()).unwrap()
        } else {
            simulate(&inst, &g).unwrap()
        };
        let v = check_schedule_feasibility(&inst, &out.schedule);
        prop_assert!(v.is_empty(), "{:?}", v);
        assert_complete(&inst, &out.schedule);
        prop_assert!(out.genome.validate(&inst).is_ok());
        prop_assert!(out.decisions.windows(2).all(|w| w[0].time <= w[1].time));
        prop_assert!(out.decisions.iter().all(|d| !d.processable.is_empty()));
        if !with_policy {
            prop_assert!(out.decisions.is_empty());
        }
    }

    #[test]
    fn generated_instances_validate_and_round_trip(
        seed in any::<u64>(),
        jobs in 1usize..10,
        stations in 1usize..7,
        workers in 1usize..6,
        density in 0.01f64..1.0,
        prec in 0.0f64..1.0,
        slots in 1usize..4,
    ) {
        let inst = generate_instance(&small_config(seed, jobs, stations, workers, density, prec, slots)).unwrap();
        prop_assert!(validate_instance(&inst).is_valid());
        let text = instance_to_toml(&inst).unwrap();
        prop_assert_eq!(instance_from_toml(&text).unwrap(), inst);
    }
}

#[test]
fn schedule_csv_round_trip_on_decoded_schedules() {
    for seed in 0..20 {
        let inst = generate_instance(&GeneratorConfig::gbrt01(seed)).unwrap();
        let g = init_population(&inst, 1, seed).unwrap().remove(0);
        let s = simulate(&inst, &g).unwrap().schedule;
        let text = schedule_to_csv(&s).unwrap();
        assert_eq!(schedule_from_csv(&text).unwrap(), s);
    }
}

#[test]
fn no_heuristic_beats_the_oracle() {
    for seed in 0..12 {
        let inst = generate_instance(&GeneratorConfig::tiny(seed)).unwrap();
        let base = reference_baseline(&inst).unwrap();
        let opt = brute_force(&inst, &base, 2_000_000).unwrap();
        let cfg = SearchConfig {
            baseline: Some(base),
            ..Default::default()
        };
        for h in [Heuristic::Str, Heuristic::Mtwr, Heuristic::Ts, Heuristic::Sars, Heuristic::Ga, Heuristic::Gasa] {
            let r = run_heuristic(&inst, h, &cfg, 200, seed, 1, None).unwrap();
            assert!(r.best_z >= opt.z - 1e-9, "{h} on seed {seed}: {} < {}", r.best_z, opt.z);
        }
    }
}
