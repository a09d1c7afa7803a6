//! Command-line front end. `main.rs` only forwards to [`run_cli`].
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 I/O error,
//! 3 numerical failure.

mod bench;
mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::SkmError;

pub use bench::{BenchRow, ManifestEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Clustering with smoothed within-cluster sum of squares (HKM, FKM, MEFC, EKM).
#[derive(Debug, Parser)]
#[command(name = "smoothkm", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as CSV (features, then `label`).
    Gen(GenArgs),
    /// Cluster a dataset and write the run result as JSON.
    Cluster(ClusterArgs),
    /// Compare predicted labels with reference labels (NMI, ARI, ACC).
    Eval(EvalArgs),
    /// Scan 1-D objectives as one centroid moves along a grid.
    Landscape(LandscapeArgs),
    /// Run EKM over a list of alphas and report centroid separation.
    AlphaScan(AlphaScanArgs),
    /// Streaming (mini-batch) HKM or EKM over shuffled epochs.
    Stream(StreamArgs),
    /// Benchmark datasets × algorithms over repeated trials.
    Bench(BenchArgs),
}

/// Where the data comes from: a CSV file or a built-in generator.
#[derive(Debug, Clone, Args)]
pub struct DataSource {
    /// Input CSV (optional header; trailing `label` column when the header names it).
    #[arg(long, short = 'i', conflicts_with_all = ["suite", "case_study"])]
    pub input: Option<PathBuf>,
    /// Built-in imbalanced suite (A, B, C or D).
    #[arg(long, conflicts_with = "case_study")]
    pub suite: Option<String>,
    /// Built-in 1-D case study (1..=4).
    #[arg(long)]
    pub case_study: Option<u8>,
    /// Seed for built-in suites.
    #[arg(long, default_value_t = 1)]
    pub data_seed: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Imbalanced suite (A, B, C or D).
    #[arg(long, conflicts_with_all = ["case_study", "spec"])]
    pub suite: Option<String>,
    /// Case study 1..=4 (fixed seed).
    #[arg(long, conflicts_with = "spec")]
    pub case_study: Option<u8>,
    /// JSON mixture spec file (components with shape, size, center, scale; seed).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path; standard output when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

/// Algorithm selection shared by `cluster`.
#[derive(Debug, Clone, Args)]
pub struct AlgorithmArgs {
    /// hkm, fkm, mefc or ekm.
    #[arg(long = "alg", default_value = "ekm")]
    pub algorithm: String,
    /// FKM fuzzifier (> 1).
    #[arg(long, default_value_t = 2.0)]
    pub m: f64,
    /// MEFC sharpness (> 0).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// EKM alpha: a positive number or `auto` (2 / mean half squared norm).
    #[arg(long, default_value = "auto")]
    pub alpha: String,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Number of clusters; defaults to the number of reference classes.
    #[arg(long, short = 'k')]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Skip z-score normalization.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataSource,
    #[command(flatten)]
    pub alg: AlgorithmArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Record the objective after every iteration.
    #[arg(long)]
    pub trace: bool,
    /// RunResult JSON path; standard output when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Labels CSV aligned with the input rows.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels CSV.
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference labels CSV.
    #[arg(long = "ref")]
    pub reference: PathBuf,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub data: DataSource,
    /// Fixed centroid positions, comma separated, in cluster order.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
    pub fix: Vec<f64>,
    /// Slot of the scanned centroid; defaults to after the fixed ones.
    #[arg(long)]
    pub scan_index: Option<usize>,
    /// start:end:step
    #[arg(long, allow_hyphen_values = true, default_value = "-10:10:0.01")]
    pub grid: String,
    /// Smoothers, comma separated: hard, lse:<λ>, pnorm:<p>, boltz:<α>.
    #[arg(long, value_delimiter = ',', default_value = "hard,lse:1,pnorm:1,boltz:1")]
    pub specs: Vec<String>,
    /// Z-score the data first (off by default so grid units match the data).
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlphaScanArgs {
    #[command(flatten)]
    pub data: DataSource,
    #[command(flatten)]
    pub run: RunArgs,
    /// Alphas to scan, comma separated, in scan order.
    #[arg(long, value_delimiter = ',', default_value = "10,8,5,2,1,0.8,0.5,0.2,0.1")]
    pub alphas: Vec<f64>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[command(flatten)]
    pub data: DataSource,
    /// hkm or ekm.
    #[arg(long, default_value = "ekm")]
    pub mode: String,
    /// EKM alpha: a positive number or `auto`.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    #[arg(long, short = 'k')]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Present rows in file order instead of shuffling each epoch.
    #[arg(long)]
    pub no_shuffle: bool,
    #[arg(long)]
    pub no_normalize: bool,
    /// Final centroids JSON; standard output when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Per-epoch objective CSV.
    #[arg(long)]
    pub epochs_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// CSV with columns `dataset,algorithm[,k]`; dataset is `suite:<A-D>`,
    /// `case:<1-4>` or a CSV path with labels, algorithm is `hkm`, `fkm:<m>`,
    /// `mefc:<λ>` or `ekm:<α|auto>`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub data_seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

/// Failure of a CLI command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<SkmError> for CliError {
    fn from(e: SkmError) -> Self {
        let code = match &e {
            SkmError::Io(_) => EXIT_IO,
            SkmError::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
            SkmError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on standard error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
