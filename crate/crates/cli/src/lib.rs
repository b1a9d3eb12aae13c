//! Command-line front-end for `gp-core`: CSV in, prediction tables and SVG
//! figures out.
//!
//! Exit codes: 0 on success, 2 for input errors (flags, files, data,
//! kernel specs), 3 when the numerics fail on otherwise valid input.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod data;
pub mod error;
pub mod svg;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gp",
    version,
    about = "Gaussian-process regression, classification and GP-LVM"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact GP regression on a CSV with header `x,y` (or `x1..xk,y`).
    Regress(RegressArgs),
    /// Laplace GP classification on a CSV with a trailing `label` column.
    Classify(ClassifyArgs),
    /// GP latent variable model on numeric columns (optional `label` column).
    Lvm(LvmArgs),
    /// Print the Gram matrix K, the cross-covariance K* and K**.
    KernelEval(KernelEvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input CSV file.
    #[arg(long)]
    pub data: PathBuf,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG figure.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct TestPoints {
    /// Evenly spaced 1-D test inputs, `MIN:MAX:N`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "test")]
    pub grid: Option<String>,
    /// CSV of test inputs with the same input columns as the data.
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RegressArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Kernel spec, e.g. `se(sf=1.27,l=1)+noise(sn=0.3!)`; `!` fixes a value.
    #[arg(long, default_value = "se(sf=1,l=1)+noise(sn=0.1)")]
    pub kernel: String,
    /// Maximize the marginal likelihood over the free parameters first.
    #[arg(long)]
    pub optimize: bool,
    #[command(flatten)]
    pub points: TestPoints,
    /// Half-width of the band in predictive standard deviations.
    #[arg(long, default_value_t = 1.96)]
    pub band: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Kernel spec for the latent function (shared by every class).
    #[arg(long, default_value = "se(sf=1,l=1)")]
    pub kernel: String,
    #[arg(long)]
    pub optimize: bool,
    #[command(flatten)]
    pub points: TestPoints,
}

#[derive(Debug, Clone, Args)]
pub struct LvmArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Latent dimension; must be below the number of data columns.
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct KernelEvalArgs {
    /// Input CSV; a trailing `y` or `label` column is ignored.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "se(sf=1,l=1)+noise(sn=0.1)")]
    pub kernel: String,
    /// One test input, coordinates separated by commas.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["grid", "test"])]
    pub x_star: Option<String>,
    #[command(flatten)]
    pub points: TestPoints,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Regress(a) => commands::regress::run(&a),
        Command::Classify(a) => commands::classify::run(&a),
        Command::Lvm(a) => commands::lvm::run(&a),
        Command::KernelEval(a) => commands::kernel_eval::run(&a),
    }
}
