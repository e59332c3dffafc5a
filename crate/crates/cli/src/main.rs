mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use largeness_core::Error;

pub const NODE_BUDGET_VAR: &str = "LARGENESS_LAB_NODE_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "largeness-lab", version, about = "Decide, certify and extract large finite sets")]
pub struct Cli {
    /// Worker threads for the parallel searches.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a set is large for an index.
    Check(CheckArgs),
    /// Work with witness JSON files.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Run an extraction pipeline.
    Extract(ExtractArgs),
    /// Strong-forest searches.
    #[command(subcommand)]
    Milliken(MillikenCmd),
    /// Brute-force oracles.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Print the tabulated upper bound.
    Bounds(BoundsArgs),
    /// Least R with a homogeneous subset for every pair coloring.
    Ramsey(RamseyArgs),
}

/// Notion and apartness formula shared by several commands.
#[derive(Debug, Args)]
pub struct NotionArgs {
    /// ks, theta or star; star for extract, ks elsewhere.
    #[arg(long, value_enum)]
    pub notion: Option<NotionArg>,
    /// Apartness formula in x, y, z.
    #[arg(long, conflicts_with = "theta_file")]
    pub theta: Option<String>,
    #[arg(long)]
    pub theta_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NotionArg {
    Ks,
    Theta,
    Star,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub alpha: String,
    #[command(flatten)]
    pub notion: NotionArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// exp4, poly, none or omega:N.
    #[arg(long)]
    pub sparse: Option<String>,
    /// Write the witness JSON here when the set is large.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum WitnessCmd {
    /// Re-check a witness file.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// Ambient set; the witness carrier when omitted.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub alpha: String,
    #[command(flatten)]
    pub notion: NotionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PipelineArg {
    Pigeonhole,
    Rt1,
    Grouping,
    Em,
    Ads,
    Rt22,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Strict,
    Lazy,
    None,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, value_enum)]
    pub pipeline: PipelineArg,
    /// Input set; the witness carrier when omitted.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub witness: Option<PathBuf>,
    #[arg(long)]
    pub coloring: Option<PathBuf>,
    /// Index of the input witness (grouping only).
    #[arg(long)]
    pub alpha: Option<String>,
    #[command(flatten)]
    pub notion: NotionArgs,
    #[arg(long, value_enum, default_value = "lazy")]
    pub policy: PolicyArg,
    /// direct, searched[:CAP] or optimistic:FILE.
    #[arg(long, default_value = "direct")]
    pub provider: String,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Pigeonhole and bounded-color branching; rt1 uses the minimum form without it.
    #[arg(long)]
    pub a: Option<u64>,
    /// Remaining pigeonhole components, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<u64>,
    /// Grouping: homogenize blocks by search at this exponent.
    #[arg(long)]
    pub target: Option<u32>,
    /// Follow the published exponents instead of searching.
    #[arg(long)]
    pub paper: bool,
    /// Directory for result.txt, witness.json and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MillikenCmd {
    /// Least height N found by exhaustive search.
    Search(MilSearchArgs),
    /// A monochromatic subforest for a built-in coloring rule.
    Mono(MonoArgs),
}

#[derive(Debug, Args)]
pub struct MilSearchArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub l: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub r: u64,
    #[arg(long)]
    pub cap: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    /// Sum of the level map, mod r.
    LevelSum,
    /// Number of ones in the first tree's leaves, mod r.
    LeafBits,
}

#[derive(Debug, Args)]
pub struct MonoArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub height: u32,
    #[arg(long)]
    pub l: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub r: u64,
    #[arg(long, value_enum, default_value = "level-sum")]
    pub rule: RuleArg,
    #[arg(long)]
    pub leaves_only: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Every admissible coloring has a large solution.
    PLarge(PLargeArgs),
}

#[derive(Debug, Args)]
pub struct PLargeArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub alpha: String,
    /// rt{n}_{k}, rt1, em or ads.
    #[arg(long)]
    pub statement: String,
    #[command(flatten)]
    pub notion: NotionArgs,
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub statement: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum)]
    pub notion: NotionArg,
    /// Print every tabulated bound, space separated.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct RamseyArgs {
    #[arg(long)]
    pub colors: u64,
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub cap: usize,
}

/// Failures outside the library.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) => 3,
            CliError::Core(e) => match e.root() {
                Error::Parse { .. } | Error::FreeVariable(_) => 3,
                Error::ResourceLimit(_) => 4,
                Error::NotFound { .. } | Error::Invariant(_) => 1,
                _ => 2,
            },
        }
    }
}

/// Summary lines for stdout and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn ok(line: impl Into<String>) -> Self {
        Outcome { code: 0, lines: vec![line.into()] }
    }

    pub fn fail(line: impl Into<String>) -> Self {
        Outcome { code: 1, lines: vec![line.into()] }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let jobs = cli.jobs;
    match largeness_core::par::with_jobs(jobs, || commands::run(cli.command)) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
