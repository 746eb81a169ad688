//! `obstacle`: build, audit and stress the spanner lower-bound
//! constructions.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 audit findings.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "obstacle", version, about = "Obstacle-product constructions for additive spanner lower bounds")]
struct Cli {
    /// Worker threads for parallel audits (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Run the construction pipeline and write stage artifacts.
    Gen(GenArgs),
    /// Audit stage artifacts read from disk.
    Verify(VerifyArgs),
    /// Build a baseline spanner and audit its stretch.
    Spanner(SpannerArgs),
    /// Random subgraphs keeping few certificate edges, checked for witnesses.
    Stress(StressArgs),
    /// Pigeonhole collision between family members under a toy compressor.
    Incompress(IncompressArgs),
    /// Merged CSV of stage statistics.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Stage {
    Base,
    Compress,
    Op,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Host {
    Compressed,
    Base,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "op")]
    stage: Stage,
    /// Shell side length.
    #[arg(long)]
    p: Option<u64>,
    /// Shell dimension (derived from --eps when omitted).
    #[arg(long)]
    d: Option<u32>,
    /// Base path length.
    #[arg(long)]
    k: Option<u32>,
    /// Target exponent; sets d = ceil(3/eps).
    #[arg(long)]
    eps: Option<f64>,
    /// Use the handcrafted set A = {1, 2} in [2].
    #[arg(long, conflicts_with_all = ["p", "d", "eps"])]
    fixture: bool,
    /// Keep only the smallest elements of the shell set.
    #[arg(long)]
    size_cap: Option<usize>,
    #[arg(long, value_enum, default_value = "compressed")]
    op_host: Host,
    #[arg(long, default_value_t = 10_000_000)]
    node_ceiling: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CheckArg {
    All,
    UniqueSp,
    Disjoint,
    #[value(name = "2path")]
    TwoPath,
    OpClaims,
    Family,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// A stage directory, or a pipeline output directory to verify every
    /// stage in it.
    #[arg(long = "in")]
    #[serde(skip)]
    input: PathBuf,
    #[arg(long, value_enum, default_values = ["all"])]
    check: Vec<CheckArg>,
    /// Largest pair count for which `all` includes the family check.
    #[arg(long, default_value_t = 16)]
    family_limit: usize,
    /// Report path (default: verify-report.json inside --in).
    #[arg(long)]
    #[serde(skip)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Algo {
    Plus2,
    Plus6,
    Greedy,
}

#[derive(Args, Debug, Serialize)]
struct SpannerArgs {
    /// An edge-list file or a stage directory.
    #[arg(long = "in")]
    #[serde(skip)]
    input: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    /// Stretch parameter of the greedy spanner.
    #[arg(long, default_value_t = 2)]
    t: u32,
    /// Light-node degree threshold of the +2 spanner.
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct StressArgs {
    /// An op stage directory.
    #[arg(long = "in")]
    #[serde(skip)]
    input: PathBuf,
    /// Certificate edges kept per trial.
    #[arg(long)]
    budget_clique_edges: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CompressorArg {
    Bitmap,
    Hash,
}

#[derive(Args, Debug, Serialize)]
struct IncompressArgs {
    /// An op stage directory.
    #[arg(long = "in")]
    #[serde(skip)]
    input: PathBuf,
    #[arg(long)]
    bits: u32,
    #[arg(long, value_enum, default_value = "hash")]
    compressor: CompressorArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    /// A pipeline output directory.
    #[arg(long = "in")]
    #[serde(skip)]
    input: PathBuf,
    /// CSV path (default: stdout).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Findings(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let echo = serde_json::to_value(&cli).expect("arguments serialise");
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a, &echo),
        Command::Verify(a) => commands::verify(a, &echo),
        Command::Spanner(a) => commands::spanner(a, &echo),
        Command::Stress(a) => commands::stress(a, &echo),
        Command::Incompress(a) => commands::incompress(a, &echo),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Findings(msg)) => {
            eprintln!("audit findings: {msg}");
            ExitCode::from(2)
        }
    }
}
