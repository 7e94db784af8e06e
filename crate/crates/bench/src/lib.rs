//! Shared fixtures for the benchmarks.

use drcsched::dataio::{generate_instance, GeneratorConfig};
use drcsched::genome::init_population;
use drcsched::{Genome, ProblemInstance};

pub fn instance(preset: &str, seed: u64) -> ProblemInstance {
    generate_instance(&GeneratorConfig::preset(preset, seed).unwrap()).unwrap()
}

pub fn genome(instance: &ProblemInstance, seed: u64) -> Genome {
    init_population(instance, 1, seed).unwrap().remove(0)
}
