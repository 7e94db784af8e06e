use clap::{Args, Parser, Subcommand, ValueEnum};
use drcsched::search::Heuristic;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "drcsched", version, about = "Scheduling for job shops with station and worker constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic instance from a preset or a generator config.
    Generate(GenerateArgs),
    /// Check an instance file for structural problems.
    Validate(ValidateArgs),
    /// Run a heuristic on an instance for one or more seeds.
    Solve(SolveArgs),
    /// Train a dispatching policy on an instance.
    Train(TrainArgs),
    /// Run heuristics on every instance in a directory and build report tables.
    Bench(BenchArgs),
    /// Check a schedule csv against an instance.
    Check(CheckArgs),
    /// Write the mixed-integer model of an instance in LP format.
    ExportLp(ExportLpArgs),
    /// Re-run the command recorded in a manifest and compare its outputs.
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// Preset name: gbrt01, gbrt02, realworld, medium, tiny.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<String>,
    /// Generator config file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the seed of the preset or config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instance: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    #[default]
    Sample,
    Greedy,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// One of str, mtwr, ts, sars, ga, gasa, gasa-rl.
    #[arg(long)]
    pub heuristic: Heuristic,
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    /// Number of seeds; runs use seeds first-seed, first-seed + 1, ...
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// Policy checkpoint; required by gasa-rl.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyMode::Sample)]
    pub policy_mode: PolicyMode,
    /// Search config file (TOML); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Trainer config file (TOML); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the number of training steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Generations of the warm-up search that sets the reward label.
    #[arg(long, default_value_t = 10)]
    pub warmup_generations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Directory with instance files (*.toml).
    #[arg(long)]
    pub datasets: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "str,mtwr,ts,sars,ga,gasa")]
    pub heuristics: Vec<Heuristic>,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    /// Parallelism levels; quality tables use the first, timing covers all.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub parallelism: Vec<usize>,
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyMode::Sample)]
    pub policy_mode: PolicyMode,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ExportLpArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Refuse models with more variables than this.
    #[arg(long, default_value_t = 20_000)]
    pub max_variables: usize,
    /// Turn due dates into hard deadlines.
    #[arg(long)]
    pub hard_due_dates: bool,
    /// Normalize objective terms with the instance's reference baseline.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the re-run outputs.
    #[arg(long)]
    pub out: PathBuf,
}
