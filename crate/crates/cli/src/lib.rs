//! The `qtsvm` command line. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 on runtime
//! or numeric failure, 2 on usage or configuration errors.

mod benchmark;
mod error;
mod generate;
mod manifest;
mod nemenyi;
mod predict;
mod train;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use benchmark::{BenchmarkConfig, DatasetSpec};
pub use error::CliError;
pub use manifest::RunManifest;

use qtsvm::LiftingMode;

#[derive(Debug, Parser)]
#[command(name = "qtsvm", version, about = "Quadratic-surface twin SVM toolkit")]
pub struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Train a model on a labeled CSV.
    Train(TrainArgs),
    /// Classify a CSV with a saved model.
    Predict(PredictArgs),
    /// Run a cross-validation sweep described by a TOML file.
    Benchmark(BenchmarkArgs),
    /// Mean ranks and Nemenyi critical difference for a results matrix.
    Nemenyi(NemenyiArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cl1qtsvm,
    Lsqtsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Full,
    Reduced,
}

impl From<ModeArg> for LiftingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => LiftingMode::Full,
            ModeArg::Reduced => LiftingMode::Reduced,
        }
    }
}

/// How the generator's noise parameter is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseReading {
    Std,
    Variance,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Which example (1, 2 or 3).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
    pub example: u32,
    /// Samples per class.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    /// Fraction of labels to flip, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub noise_ratio: f64,
    #[arg(long, value_enum, default_value_t = NoiseReading::Std)]
    pub noise_reading: NoiseReading,
    /// Angle range of the positive class in example 2, as LO,HI.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub theta_pos: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Cl1qtsvm)]
    pub method: Method,
    /// Regularization c1, default 1 (for lsqtsvm: its single parameter C, default 1).
    #[arg(long)]
    pub c1: Option<f64>,
    /// Penalty c2, default 1e-5 (cl1qtsvm only).
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    /// Capped-L1 threshold.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    #[arg(long, default_value_t = 30)]
    pub max_iter: usize,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Fit report path (default: <model-out>.report.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Label column: 0-based index, header name, or "last".
    #[arg(long, default_value = "last")]
    pub label_column: String,
    #[arg(long, default_value = "1")]
    pub positive_label: String,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Features, optionally followed by a label column.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "1")]
    pub positive_label: String,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct NemenyiArgs {
    /// Wide CSV (dataset column, then one column per method) or a benchmark results table.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Smaller scores are better (e.g. error rates).
    #[arg(long)]
    pub lower_is_better: bool,
    /// Also write the ranks as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    match execute(&argv) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(argv: &[String]) -> Result<(), CliError> {
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::usage("--jobs must be at least 1")),
        Some(j) => j,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.into()))?;
    let recorded: Vec<String> = argv.iter().skip(1).cloned().collect();
    pool.install(|| match &cli.command {
        Command::Generate(a) => generate::run(a, &cli, &recorded),
        Command::Train(a) => train::run(a, &cli, &recorded),
        Command::Predict(a) => predict::run(a, &cli, &recorded),
        Command::Benchmark(a) => benchmark::run(a, &cli, &recorded),
        Command::Nemenyi(a) => nemenyi::run(a, &cli, &recorded),
        Command::Replay(a) => replay(a),
    })
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let m = RunManifest::load(&a.manifest)?;
    if m.argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::usage("a manifest cannot replay another replay"));
    }
    let mut argv = vec!["qtsvm".to_string()];
    argv.extend(m.argv);
    execute(&argv)
}
