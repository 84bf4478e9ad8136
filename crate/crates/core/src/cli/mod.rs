//! Command-line front end: `generate`, `solve` and `bench`.
//!
//! Exit codes: 0 on success (also when a solve stops on its budget), 1 on
//! invalid input, 2 on I/O failure.

mod commands;
mod files;
mod rows;

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    cmd_bench, cmd_generate, cmd_solve, solve_design, solve_nmf, summarize_design, summarize_nmf,
    BenchGrid, BenchOutcome, BenchSpec, Fixture, GeneratorSpec, RunConfig, RunReport,
    SolveSettings, Source,
};
pub use files::{
    append_rows, digest, instance_id, read_instance, read_rows, sidecar, write_instance,
    DesignFile, InstanceFile, NmfFile, PlantedFile,
};
pub use rows::{BenchDesignRow, BenchNmfRow, DesignRow, DesignSummaryRow, NmfRow, NmfSummaryRow};

use crate::engine::{Pruning, SearchConfig, StopCondition, Strategy};
use crate::error::{Error, Result};
use crate::prior_nmf::NmfGeneratorParams;
use crate::smart_design::{ComponentScore, GeneratorParams};

pub const SEED_ENV: &str = "BAGEL_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "bagel",
    version,
    about = "Branch, generate and learn solver for constrained learning problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic instance file and print its sha-256 digest.
    Generate(GenerateArgs),
    /// Solve one instance and append result rows.
    Solve(SolveArgs),
    /// Sweep generator grids over several seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    SmartDesign,
    PriorNmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Dfs,
    BestFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PruningArg {
    Exact,
    Heuristic,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoringArg {
    MaxAbs,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureArg {
    ToySearch,
}

#[derive(Debug, Clone, Args)]
pub struct GenParams {
    /// Smart design: number of features.
    #[arg(long)]
    pub n: Option<usize>,
    /// Smart design: number of samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Smart design: budget as a fraction of the total component cost.
    #[arg(long)]
    pub cost: Option<f64>,
    /// Smart design: number of components (default min(10, 2 + n/5)).
    #[arg(long)]
    pub components: Option<usize>,
    /// Prior NMF: vocabulary size.
    #[arg(long)]
    pub words: Option<usize>,
    #[arg(long)]
    pub true_topics: Option<usize>,
    #[arg(long)]
    pub false_topics: Option<usize>,
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    pub sparsity: f64,
    /// Prior NMF: true topics left out of the database.
    #[arg(long, default_value_t = 0)]
    pub novelty: usize,
    /// Noise level relative to the signal (0.1 for smart design, 0.05 for prior NMF).
    #[arg(long)]
    pub noise_ratio: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Wall-clock budget per search, in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub timeout_s: f64,
    #[arg(long)]
    pub node_cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Dfs)]
    pub strategy: StrategyArg,
    /// Default: exact for smart design, heuristic for prior NMF.
    #[arg(long, value_enum)]
    pub pruning: Option<PruningArg>,
    /// Baseline component score.
    #[arg(long, value_enum, default_value_t = ScoringArg::MaxAbs)]
    pub scoring: ScoringArg,
    /// Multiplicative updates per trained NMF node.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Random NMF restarts per node.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: GenParams,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Instance file written by `generate`.
    #[arg(long, conflicts_with_all = ["problem", "fixture"])]
    pub instance: Option<PathBuf>,
    /// Generate the instance in memory instead of reading a file.
    #[arg(long, value_enum, conflicts_with = "fixture")]
    pub problem: Option<ProblemKind>,
    #[arg(long, value_enum)]
    pub fixture: Option<FixtureArg>,
    /// Solver seed; generator seed with --problem. Defaults to the instance seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Result table (CSV, appended).
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
    /// Write node-by-node traces next to the result table.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub params: GenParams,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemKind,
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20])]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize])]
    pub samples: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.6, 0.8, 0.9])]
    pub cost: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [20usize])]
    pub words: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize])]
    pub true_topics: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize])]
    pub false_topics: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [50usize])]
    pub docs: Vec<usize>,
    #[arg(long, default_value_t = 0.8)]
    pub sparsity: f64,
    #[arg(long)]
    pub noise_ratio: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3])]
    pub seeds: Vec<u64>,
    /// Directory for rows.csv and summary.csv.
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub search: SearchArgs,
}

/// `BAGEL_SEED` when set, else the flag value.
fn seed_override(flag: Option<u64>) -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => {
            v.trim().parse().map(Some).map_err(|_| {
                Error::Validation(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
            })
        }
        Err(_) => Ok(flag),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Validation(format!("--{flag} is required")))
}

impl GenParams {
    fn spec(&self, problem: ProblemKind, seed: u64) -> Result<GeneratorSpec> {
        Ok(match problem {
            ProblemKind::SmartDesign => {
                let mut p = GeneratorParams::new(
                    require(self.n, "n")?,
                    require(self.samples, "samples")?,
                    require(self.cost, "cost")?,
                    seed,
                );
                p.components = self.components;
                if let Some(r) = self.noise_ratio {
                    p.noise_ratio = r;
                }
                GeneratorSpec::SmartDesign(p)
            }
            ProblemKind::PriorNmf => {
                let mut p = NmfGeneratorParams::new(
                    require(self.words, "words")?,
                    require(self.true_topics, "true-topics")?,
                    require(self.false_topics, "false-topics")?,
                    require(self.docs, "docs")?,
                    seed,
                );
                p.sparsity = self.sparsity;
                p.novelty = self.novelty;
                if let Some(r) = self.noise_ratio {
                    p.noise_ratio = r;
                }
                GeneratorSpec::PriorNmf(p)
            }
        })
    }
}

impl SearchArgs {
    fn settings(&self, seed: Option<u64>) -> Result<SolveSettings> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(Error::Validation(format!(
                "--timeout-s must be positive, got {}",
                self.timeout_s
            )));
        }
        Ok(SolveSettings {
            search: SearchConfig {
                stop: StopCondition {
                    wall_clock: Some(Duration::from_secs_f64(self.timeout_s)),
                    node_budget: self.node_cap,
                },
                strategy: match self.strategy {
                    StrategyArg::Dfs => Strategy::DepthFirst,
                    StrategyArg::BestFirst => Strategy::BestFirst,
                },
                pruning: Pruning::default(),
            },
            pruning: self.pruning.map(|p| match p {
                PruningArg::Exact => Pruning::Exact,
                PruningArg::Heuristic => Pruning::Heuristic,
                PruningArg::Off => Pruning::Off,
            }),
            seed,
            scoring: match self.scoring {
                ScoringArg::MaxAbs => ComponentScore::MaxAbs,
                ScoringArg::L2 => ComponentScore::L2,
            },
            iters: self.iters,
            restarts: self.restarts,
            parallel_folds: true,
        })
    }
}

impl SolveArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let seed = seed_override(self.seed)?;
        let (source, solver_seed) = match (&self.instance, self.problem, self.fixture) {
            (Some(p), None, None) => (Source::Path(p.clone()), seed),
            // the generated instance carries the seed, and the solver reuses it
            (None, Some(kind), None) => (
                Source::Generate(self.params.spec(kind, seed.unwrap_or(0))?),
                None,
            ),
            (None, None, Some(FixtureArg::ToySearch)) => {
                (Source::Fixture(Fixture::ToySearch), seed)
            }
            _ => {
                return Err(Error::Validation(
                    "give exactly one of --instance, --problem or --fixture".into(),
                ))
            }
        };
        Ok(RunConfig {
            source,
            settings: self.search.settings(solver_seed)?,
            out: self.out.clone(),
            trace: self.trace,
        })
    }
}

impl BenchArgs {
    pub fn spec(&self) -> Result<BenchSpec> {
        let grid = match self.problem {
            ProblemKind::SmartDesign => BenchGrid::SmartDesign {
                features: self.n.clone(),
                samples: self.samples.clone(),
                costs: self.cost.clone(),
                noise_ratio: self.noise_ratio.unwrap_or(0.1),
            },
            ProblemKind::PriorNmf => BenchGrid::PriorNmf {
                words: self.words.clone(),
                true_topics: self.true_topics.clone(),
                false_topics: self.false_topics.clone(),
                docs: self.docs.clone(),
                sparsity: self.sparsity,
                noise_ratio: self.noise_ratio.unwrap_or(0.05),
            },
        };
        let seeds = match seed_override(None)? {
            Some(s) => vec![s],
            None => self.seeds.clone(),
        };
        Ok(BenchSpec {
            grid,
            seeds,
            settings: self.search.settings(None)?,
            out_dir: self.out.clone(),
        })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 2,
        _ => 1,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let seed = seed_override(Some(args.seed))?.unwrap_or(args.seed);
            let digest = cmd_generate(&args.params.spec(args.problem, seed)?, &args.out)?;
            println!("{digest}  {}", args.out.display());
        }
        Command::Solve(args) => {
            let config = args.run_config()?;
            let report = cmd_solve(&config)?;
            let completed = report.stats.iter().all(|s| s.completed);
            for s in &report.stats {
                for w in &s.warnings {
                    log::warn!("{w}");
                }
            }
            println!(
                "{}: {} rows appended to {}{}",
                report.instance_id,
                report.design_rows.len() + report.nmf_rows.len(),
                config.out.display(),
                if completed {
                    ""
                } else {
                    " (search stopped on budget)"
                }
            );
        }
        Command::Bench(args) => {
            let outcome = cmd_bench(&args.spec()?)?;
            println!(
                "{} cells run, {} skipped, {} failed; rows in {}, summary in {}",
                outcome.ran,
                outcome.skipped,
                outcome.failed,
                outcome.rows.display(),
                outcome.summary.display()
            );
        }
    }
    Ok(())
}
