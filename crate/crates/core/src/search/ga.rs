use super::trajectory::anneal;
use super::{mean_z, resolve_baseline, Evaluated, Evaluator, Heuristic, PolicySource, SearchConfig, SearchResult};
use crate::error::{Error, Result};
use crate::genome::{init_population, jox_crossover, mutate, Genome};
use crate::instance::ProblemInstance;
use crate::rng::{derive_seed, substream};
use rand::Rng;

const INIT: u64 = 0x6A00;
const BREED: u64 = 0x6A01;
const EVAL: u64 = 0x6A02;
const SA_GATE: u64 = 0x6A03;
const SA_RUN: u64 = 0x6A04;

pub fn run_ga(
    instance: &ProblemInstance,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
    parallelism: usize,
) -> Result<SearchResult> {
    memetic(instance, config, budget, seed, parallelism, None, Heuristic::Ga)
}

/// GA where each generation the fittest genome is, with the configured
/// probability, annealed for a few steps on a copy; the result replaces
/// the weakest survivor when it beats the fittest.
pub fn run_gasa(
    instance: &ProblemInstance,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
    parallelism: usize,
) -> Result<SearchResult> {
    memetic(instance, config, budget, seed, parallelism, None, Heuristic::Gasa)
}

/// GASA with every simulation driven by `policy`. Assignment flips taken
/// by the policy are kept in the evaluated genomes.
pub fn run_gasa_rl(
    instance: &ProblemInstance,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
    parallelism: usize,
    policy: &dyn PolicySource,
) -> Result<SearchResult> {
    memetic(instance, config, budget, seed, parallelism, Some(policy), Heuristic::GasaRl)
}

/// The `n` best of `pool`. Copies of an already chosen genome only fill
/// places left over once every distinct genome is taken.
fn select(mut pool: Vec<Evaluated>, n: usize) -> Vec<Evaluated> {
    pool.sort_by(|a, b| a.key_cmp(b));
    let mut chosen: Vec<Evaluated> = Vec::with_capacity(n);
    let mut copies = Vec::new();
    for e in pool {
        if chosen.len() == n {
            break;
        }
        if chosen.iter().any(|c| c.genome == e.genome) {
            copies.push(e);
        } else {
            chosen.push(e);
        }
    }
    let missing = n - chosen.len();
    chosen.extend(copies.into_iter().take(missing));
    chosen
}

fn breed(
    instance: &ProblemInstance,
    parents: &[Evaluated],
    seed: u64,
    gen: usize,
    child: usize,
    (pc, pm): (f64, f64),
) -> Result<(Genome, u64)> {
    let mut r = substream(seed, &[BREED, gen as u64, child as u64]);
    let i = r.gen_range(0..parents.len());
    let j = if parents.len() > 1 {
        (i + r.gen_range(1..parents.len())) % parents.len()
    } else {
        i
    };
    let mut g = if r.gen_bool(pc) {
        jox_crossover(&parents[i].genome, &parents[j].genome, &mut r)?
    } else {
        parents[i].genome.clone()
    };
    // a clone of a parent would spend an evaluation on a known genome
    if r.gen_bool(pm) || g == parents[i].genome || g == parents[j].genome {
        g = mutate(&g, instance, &mut r)?.0;
    }
    Ok((g, derive_seed(seed, &[EVAL, gen as u64, child as u64])))
}

fn memetic(
    instance: &ProblemInstance,
    config: &SearchConfig,
    budget: usize,
    seed: u64,
    parallelism: usize,
    policy: Option<&dyn PolicySource>,
    heuristic: Heuristic,
) -> Result<SearchResult> {
    let ga = &config.ga;
    ga.validate()?;
    if !(0.0..=1.0).contains(&config.sa.probability) {
        return Err(Error::Config("annealing probability must lie in [0, 1]".into()));
    }
    if budget < ga.population_size {
        return Err(Error::BudgetTooSmall {
            budget,
            population: ga.population_size,
        });
    }
    let baseline = resolve_baseline(instance, config)?;
    let mut ev = Evaluator::new(instance, baseline, policy, budget, parallelism.max(1))?;

    let initial = init_population(instance, ga.population_size, derive_seed(seed, &[INIT]))?
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, derive_seed(seed, &[EVAL, 0, i as u64])))
        .collect();
    let evaluated = ev.evaluate(initial)?;
    ev.record(0, mean_z(&evaluated));
    let mut survivors = select(evaluated, ga.survivors);

    let anneals = heuristic != Heuristic::Ga;
    let expected = ga.expected_generations(budget);
    let mut gen = 0;
    while !ev.budget.exhausted() {
        gen += 1;
        let rates = ga.rates(gen, expected);
        let n = ga.offspring.min(ev.budget.remaining());
        let children = (0..n)
            .map(|c| breed(instance, &survivors, seed, gen, c, rates))
            .collect::<Result<Vec<_>>>()?;
        let evaluated = ev.evaluate(children)?;
        let mut pool = survivors;
        pool.extend(evaluated.iter().cloned());
        survivors = select(pool, ga.survivors);

        if anneals && !ev.budget.exhausted() {
            let mut gate = substream(seed, &[SA_GATE, gen as u64]);
            if gate.gen_bool(config.sa.probability) {
                let mut r = substream(seed, &[SA_RUN, gen as u64]);
                let improved = anneal(&mut ev, survivors[0].clone(), &config.sa, &mut r, config.sa.steps, false, false)?;
                if improved.better_than(&survivors[0]) {
                    survivors.pop();
                    survivors.insert(0, improved);
                }
            }
        }
        ev.record(gen, mean_z(&evaluated));
    }
    ev.finish(heuristic, seed, parallelism.max(1))
}
