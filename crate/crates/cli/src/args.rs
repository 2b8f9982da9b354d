use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use lpmerit_core::Algorithm;

#[derive(Debug, Parser)]
#[command(
    name = "lpmerit",
    version,
    about = "LP solver based on smooth merit-function minimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random problem with a known optimum or unboundedness ray.
    Gen(GenArgs),
    /// Run a solver on a problem file.
    Solve(SolveArgs),
    /// Check a candidate solution against the optimality conditions.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Optimal,
    Unbounded,
}

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Overridden by LPMERIT_SEED when set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Kind::Optimal)]
    pub kind: Kind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Alg {
    LmAdaptive,
    LmConst,
    Homotopy,
}

impl From<Alg> for Algorithm {
    fn from(a: Alg) -> Self {
        match a {
            Alg::LmAdaptive => Algorithm::LmAdaptive,
            Alg::LmConst => Algorithm::LmConstant,
            Alg::Homotopy => Algorithm::Homotopy,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Alg::Homotopy)]
    pub alg: Alg,
    /// Penalty exponent (default 3 for lm-adaptive, 2.1 otherwise).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Fixed regularization for lm-const and homotopy.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu0: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub tol_f: Option<f64>,
    /// CSV trace output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON outcome report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// On NoOptimalSolution, also run the homogeneous model from the all-ones start.
    #[arg(long)]
    pub homogeneous_escalate: bool,
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON holding `x`, `lambda`, `s` at top level or under `point` / `known_optimum`.
    #[arg(long)]
    pub solution: PathBuf,
}
