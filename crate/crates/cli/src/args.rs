use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fml_core::learn::Method;

#[derive(Debug, Parser)]
#[command(name = "fml-agent", version, about = "FML student assessment and content recommendation experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file with one table per subcommand, e.g. `[part1]` with
    /// `generations = 100`. Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic dataset as CSV.
    GenData(GenDataArgs),
    /// Tune the assessment knowledge base with k-fold cross-validation.
    Part1(Part1Args),
    /// Score the recommendation system built from an assessment KB.
    Part2(Part2Args),
    /// Assess one student with an assessment KB.
    Infer(InferArgs),
    /// Run the JSON-lines socket service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Part1,
    Part2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ga,
    Pso,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ga => Method::Ga,
            MethodArg::Pso => Method::Pso,
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value = "part1")]
    pub stage: Stage,
    /// Number of records.
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Start a part2 dataset with the published (SA, SLP) pairs.
    #[arg(long)]
    pub include_paper_rows: bool,
    /// Standard deviation of the noise added to part1 targets.
    #[arg(long, default_value_t = fml_core::dataset::DEFAULT_NOISE_SIGMA)]
    pub noise: f64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct Part1Args {
    #[arg(long, value_enum, default_value = "pso")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    pub generations: u64,
    /// Population (GA) or swarm (PSO) size; defaults to 50 / 84.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub population: Option<u64>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Dataset CSV (see gen-data).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Run 1000, 2000 and 3000 generations instead of --generations.
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct Part2Args {
    /// `before` for the untuned KB, or an FML file from part1.
    #[arg(long, default_value = "before")]
    pub part1_kb: String,
    #[arg(long)]
    pub data: PathBuf,
    /// Largest |inferred - desired| counted as correct.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct InferArgs {
    /// `before` for the untuned KB, or an FML file.
    #[arg(long, default_value = "before")]
    pub kb: String,
    #[arg(long)]
    pub sa: f64,
    #[arg(long)]
    pub lcd: f64,
    #[arg(long)]
    pub scl: f64,
    #[arg(long)]
    pub sts: f64,
    /// Print a JSON object instead of `<value> <label>`.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ServeArgs {
    #[arg(long, default_value = fml_core::service::DEFAULT_BIND)]
    pub bind: String,
    /// `before` or an FML file.
    #[arg(long, default_value = "before")]
    pub part1_kb: String,
    /// FML file; by default derived from the part1 KB.
    #[arg(long)]
    pub part2_kb: Option<PathBuf>,
    /// Content graph JSON; by default the bundled sample.
    #[arg(long)]
    pub content_graph: Option<PathBuf>,
}
