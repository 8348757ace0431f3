use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rpkit::grid::Grid;
use rpkit::kernel::Reflection;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "rpkit", version, about = "Reflection positivity checks, sampling and Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Flat JSON object of flag names to values, merged under the command line.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Worker threads; changes speed, never output.
    #[arg(long, global = true, env = "RPKIT_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,

    /// Relative eigenvalue tolerance for positive semidefiniteness [default: 1e-9]
    #[arg(long, global = true)]
    pub psd_tol: Option<f64>,
    /// Relative eigenvalue tolerance for negative definiteness [default: 1e-9]
    #[arg(long, global = true)]
    pub nd_tol: Option<f64>,
    /// Relative cutoff for numerical rank [default: 1e-10]
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    /// Reconstruction error allowed for factorizations [default: 1e-8]
    #[arg(long, global = true)]
    pub recon_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Definiteness checks on kernels and psi functions.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Osterwalder-Schrader quotient of a reflected kernel.
    Quotient(QuotientArgs),
    /// Sample Gaussian process paths to CSV.
    Simulate(SimulateArgs),
    /// Levy-Khintchine evaluation and fitting.
    #[command(subcommand)]
    Lk(LkCommand),
    /// Monte Carlo checks of the Gaussian field.
    #[command(subcommand)]
    Mc(McCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check(c) => match c {
                CheckCommand::Pd(_) => "check pd",
                CheckCommand::Nd(_) => "check nd",
                CheckCommand::ReflectionPositive(_) => "check reflection-positive",
                CheckCommand::ReflectionNegative(_) => "check reflection-negative",
                CheckCommand::Bernstein(_) => "check bernstein",
                CheckCommand::Schoenberg(_) => "check schoenberg",
            },
            Command::Quotient(_) => "quotient",
            Command::Simulate(_) => "simulate",
            Command::Lk(LkCommand::Eval(_)) => "lk eval",
            Command::Lk(LkCommand::Fit(_)) => "lk fit",
            Command::Mc(McCommand::Characteristic(_)) => "mc characteristic",
            Command::Mc(McCommand::Covariance(_)) => "mc covariance",
            Command::Mc(McCommand::Fock(_)) => "mc fock",
        }
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse::<Grid>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Exponential,
    #[value(alias = "bm2")]
    Brownian,
    Fbm,
    #[value(alias = "bm1")]
    OneSided,
    #[value(alias = "nbm1")]
    NormalizedOneSided,
    GaussianFock,
    Tabulated,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub kernel: KernelKind,
    /// Rate of the exponential kernel.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Hurst index of the fractional Brownian kernel.
    #[arg(long)]
    pub hurst: Option<f64>,
    /// CSV table for the tabulated kernel.
    #[arg(long)]
    pub kernel_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiKind {
    Power,
    Abs,
    Lk,
    Tabulated,
}

#[derive(Debug, Args, Serialize)]
pub struct PsiArgs {
    #[arg(long, value_enum)]
    pub psi: PsiKind,
    /// Exponent of the power function.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Levy-Khintchine triple as JSON, or @path to a JSON file.
    #[arg(long)]
    pub triple: Option<String>,
    /// Two-column CSV (t, psi) for the tabulated function.
    #[arg(long)]
    pub psi_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArg {
    /// start:stop:step, log:lo:hi:count, or a comma-separated list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Grid,
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Positive semidefiniteness of a kernel Gram matrix.
    Pd(KernelCheckArgs),
    /// Negative definiteness of psi(s - t), or of a kernel Gram matrix.
    Nd(NdArgs),
    /// Positive semidefiniteness of the reflected Gram matrix.
    ReflectionPositive(ReflectionArgs),
    /// Negative definiteness of psi(s - t) on the grid and psi(s + t) on its positive part.
    ReflectionNegative(PsiCheckArgs),
    /// Alternating finite differences of psi on a positive grid.
    Bernstein(BernsteinArgs),
    /// Positive semidefiniteness of exp(-lambda psi) on the line and the semigroup.
    Schoenberg(SchoenbergArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct KernelCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
}

#[derive(Debug, Args, Serialize)]
#[group(id = "nd_source", required = true, multiple = false, args = ["psi", "kernel"])]
pub struct NdArgs {
    #[arg(long, value_enum)]
    pub psi: Option<PsiKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub triple: Option<String>,
    #[arg(long)]
    pub psi_csv: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub hurst: Option<f64>,
    #[arg(long)]
    pub kernel_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectionKind {
    Negation,
    Inversion,
    Identity,
}

impl From<ReflectionKind> for Reflection {
    fn from(r: ReflectionKind) -> Self {
        match r {
            ReflectionKind::Negation => Reflection::Negation,
            ReflectionKind::Inversion => Reflection::Inversion,
            ReflectionKind::Identity => Reflection::Identity,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ReflectionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    /// Points of the positive part; the reflection maps them to the other side.
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
    #[arg(long, value_enum, default_value_t = ReflectionKind::Negation)]
    pub reflection: ReflectionKind,
}

#[derive(Debug, Args, Serialize)]
pub struct PsiCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub psi: PsiArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
}

#[derive(Debug, Args, Serialize)]
pub struct BernsteinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub psi: PsiArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
    /// Difference step; defaults to a tenth of the minimum grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub bernstein_tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SchoenbergArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub psi: PsiArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct QuotientArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
    #[arg(long, value_enum, default_value_t = ReflectionKind::Negation)]
    pub reflection: ReflectionKind,
    /// Shift whose induced operator on the quotient is measured; repeatable.
    #[arg(long)]
    pub shift: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Fbm,
    Bm2,
    Bm1,
    Nbm1,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub process: ProcessKind,
    #[arg(long)]
    pub hurst: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
    #[arg(long)]
    pub paths: usize,
    #[arg(long)]
    pub seed: u64,
    /// Paths CSV; the sidecar JSON is written next to it with extension .json.
    #[arg(long)]
    pub out: PathBuf,
    /// Append the empirical covariance deviation to the result.
    #[arg(long)]
    pub validate: bool,
    /// With --validate, fail when the deviation exceeds this.
    #[arg(long, requires = "validate")]
    pub max_deviation: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum LkCommand {
    /// Evaluate a triple on a grid.
    Eval(LkEvalArgs),
    /// Nonnegative least-squares fit of a triple to samples.
    Fit(LkFitArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct LkEvalArgs {
    /// Triple as JSON, or @path to a JSON file.
    #[arg(long)]
    pub triple: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArg,
}

#[derive(Debug, Args, Serialize)]
pub struct LkFitArgs {
    /// Two-column CSV (t, psi).
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, value_parser = parse_grid, default_value = "log:0.01:1000:60")]
    pub lambda_grid: Grid,
    /// Fix the constant term at zero.
    #[arg(long)]
    pub no_a: bool,
    /// Fix the linear term at zero.
    #[arg(long)]
    pub no_b: bool,
    /// Fail when the fit residual exceeds this.
    #[arg(long)]
    pub max_residual: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// E exp(i phi(v)) against exp(-|v|^2 / 2).
    Characteristic(McCharArgs),
    /// E phi(v) phi(w) against <v, w>.
    Covariance(McPairArgs),
    /// Fock-space kernels of exp(i phi(v)) and exp(i phi(w)).
    Fock(McPairArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct McCharArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub v: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct McPairArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub v: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub w: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
}
