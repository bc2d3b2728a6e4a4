//! `ssnreg`: generate synthetic sparse-regression data, fit MCP/SCAD
//! penalized models, compute warm-started solution paths with tuning
//! selection, and run benchmark grids.

mod commands;
mod grid;
mod io;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ssnreg::path::SolverKind;
use ssnreg::penalty::PenaltyFamily;

/// Errors with the documented process exit codes: 2 validation, 3 solver,
/// 4 I/O.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Solver(_) => "solver",
            CliError::Io(_) => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Solver(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<ssnreg::Error> for CliError {
    fn from(e: ssnreg::Error) -> Self {
        use ssnreg::Error::*;
        match e {
            InvalidPenalty(_) | InvalidOptions(_) | FamilyMismatch { .. }
            | DimensionMismatch(_) | NotNormalized { .. } => CliError::Validation(e.to_string()),
            SingularReducedSystem { .. } | OversizedActiveSet { .. } | EmptySignal
            | NoNonzeroSolution | EmptyPath => CliError::Solver(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PenaltyArg {
    Mcp,
    Scad,
}

impl From<PenaltyArg> for PenaltyFamily {
    fn from(p: PenaltyArg) -> Self {
        match p {
            PenaltyArg::Mcp => PenaltyFamily::Mcp,
            PenaltyArg::Scad => PenaltyFamily::Scad,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum SolverArg {
    #[default]
    Ssn,
    Cd,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Ssn => SolverKind::Ssn,
            SolverArg::Cd => SolverKind::Cd,
        }
    }
}

impl fmt::Display for SolverArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverArg::Ssn => write!(f, "ssn"),
            SolverArg::Cd => write!(f, "cd"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum SelectArg {
    #[default]
    Vsc,
    Hbic,
    None,
}

impl fmt::Display for SelectArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectArg::Vsc => write!(f, "vsc"),
            SelectArg::Hbic => write!(f, "hbic"),
            SelectArg::None => write!(f, "none"),
        }
    }
}

#[derive(Parser)]
#[command(name = "ssnreg", version, about = "MCP/SCAD penalized regression solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (X.csv, y.csv, beta_true.csv).
    Gen(GenArgs),
    /// Fit a single penalized model at a fixed lambda.
    Fit(FitArgs),
    /// Compute a warm-started solution path and optionally select lambda.
    Path(PathArgs),
    /// Run a benchmark grid of data configurations and solvers.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// AR(1) correlation of the design rows, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    /// Noise level.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// True support size.
    #[arg(long = "T", default_value_t = 0)]
    pub sparsity: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    /// Design matrix CSV (n rows, p columns, optional header).
    #[arg(long)]
    pub x: PathBuf,
    /// Response CSV (n rows, one column).
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, value_enum)]
    pub penalty: PenaltyArg,
    #[arg(long)]
    pub lambda: f64,
    /// Concavity; defaults to 2.7 (MCP) or 3.7 (SCAD).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub solver: SolverArg,
    /// Solve directly from the zero initializer instead of warm-starting
    /// down the continuation grid.
    #[arg(long)]
    pub cold: bool,
    /// SSN iteration cap for a --cold fit.
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Continuation grid ratio lambda_min/lambda_max (ignored with --cold).
    #[arg(long, default_value_t = 1e-5)]
    pub alpha: f64,
    /// Continuation grid subdivisions (ignored with --cold).
    #[arg(long = "M", default_value_t = 100)]
    pub m: usize,
    /// Per-grid-point SSN iteration cap on the continuation (ignored with
    /// --cold).
    #[arg(long = "J", default_value_t = 1)]
    pub j: usize,
    /// CD sweep cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    /// CD stopping tolerance on the sweep step norm.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Require unit-norm columns instead of rescaling them.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct PathArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, value_enum)]
    pub penalty: PenaltyArg,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// lambda_min / lambda_max ratio.
    #[arg(long, default_value_t = 1e-5)]
    pub alpha: f64,
    /// Number of geometric grid subdivisions (the path has M+1 points).
    #[arg(long = "M", default_value_t = 100)]
    pub m: usize,
    /// Per-lambda SSN iteration cap.
    #[arg(long = "J", default_value_t = 1)]
    pub j: usize,
    #[arg(long, value_enum, default_value_t)]
    pub solver: SolverArg,
    #[arg(long, value_enum, default_value_t)]
    pub select: SelectArg,
    /// Include the coefficient vector in every path record.
    #[arg(long)]
    pub emit_beta: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Grid file of key=value cells, one per line.
    #[arg(long)]
    pub grid_file: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let (result, out_dir) = match &cli.command {
        Command::Gen(args) => (commands::cmd_gen(args), args.out_dir.clone()),
        Command::Fit(args) => (commands::cmd_fit(args), args.out_dir.clone()),
        Command::Path(args) => (commands::cmd_path(args), args.out_dir.clone()),
        Command::Bench(args) => (commands::cmd_bench(args), args.out.clone()),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        if std::fs::create_dir_all(&out_dir).is_ok() {
            let record = serde_json::json!({
                "kind": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            let _ = io::write_json(&out_dir.join("error.json"), &record);
        }
        std::process::exit(e.exit_code());
    }
}
