//! `nodal`: exact nodal domain counts for the right isosceles triangle.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a
//! verification fails (methods disagree or a replay differs).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "nodal",
    version,
    about = "Nodal domain counts of triangle eigenfunctions"
)]
pub struct Cli {
    /// Upper bound on worker threads; outputs do not depend on it.
    #[arg(long, global = true, env = "NODAL_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count nodal domains of one mode.
    Count(CountArgs),
    /// Compare the exact methods on every mode up to an eigenvalue cutoff.
    Verify(VerifyArgs),
    /// Histogram of normalised nodal counts over an eigenvalue window.
    Distribution(DistributionArgs),
    /// Cumulative loop or boundary counts with smooth fit and power spectrum.
    Trace(TraceArgs),
    /// SVG picture of the nodal pattern with its connectivity graph.
    Render(ModeOutArgs),
    /// Export the nodal connectivity graph.
    Graph(GraphArgs),
    /// Re-run the command recorded in a manifest and compare the outputs.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Recursion,
    Graph,
    Both,
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    pub m: u64,
    pub n: u64,
    #[arg(long, value_enum, default_value_t = CountMethod::Recursion)]
    pub method: CountMethod,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub max_lambda: u64,
    /// Also run the grid oracle on modes with eigenvalue up to this bound.
    #[arg(long)]
    pub oracle_bound: Option<u64>,
    /// Write the per-mode comparison CSV here.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DistributionArgs {
    /// Lower end of the eigenvalue window.
    #[arg(long)]
    pub lambda: u64,
    /// Relative window width: the window is `[lambda, (1 + g) lambda]`.
    #[arg(long)]
    pub g: f64,
    #[arg(long, default_value_t = nodal_core::stats::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum TraceKind {
    /// Total loops against `k = sqrt(lambda)`.
    #[value(name = "C")]
    #[serde(rename = "C")]
    Loops,
    /// Total loops against `q = sqrt(8N / pi)`.
    #[value(name = "Q")]
    #[serde(rename = "Q")]
    LoopsByIndex,
    /// Boundary intersections against `k`.
    #[value(name = "eta")]
    #[serde(rename = "eta")]
    Eta,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value_t = TraceKind::Loops)]
    pub kind: TraceKind,
    /// Start of the range, in `k` (or `q` for kind Q). Defaults to a quarter of the end.
    #[arg(long)]
    pub kmin: Option<f64>,
    #[arg(long)]
    pub kmax: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Polynomial degree of the smooth part.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Largest orbit length in the spectrum.
    #[arg(long, default_value_t = nodal_core::trace::DEFAULT_LENGTH_MAX)]
    pub length_max: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ModeOutArgs {
    pub m: u64,
    pub n: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormatArg {
    Dot,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    pub m: u64,
    pub n: u64,
    #[arg(long, value_enum, default_value_t = GraphFormatArg::Json)]
    pub format: GraphFormatArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Directory for the regenerated files; defaults to the manifest's own.
    #[arg(long)]
    pub into: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("global pool is configured once");
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
