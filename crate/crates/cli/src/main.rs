//! `elm-pi`: fit, predict, evaluate and reproduce experiments for ELM
//! prediction intervals.
//!
//! Failures print one `error kind=<tag> message="<text>"` line on stderr and
//! exit with code 2.

mod commands;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elm_pi::{Error, Result};

#[derive(Parser)]
#[command(name = "elm-pi", version, about = "Extreme Learning Machines with per-sample prediction intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a prediction-interval model and write it with a fit report.
    Fit(FitArgs),
    /// Predict intervals for every row of a CSV file.
    Predict(PredictArgs),
    /// Score an intervals file against true targets.
    Eval(EvalArgs),
    /// Run a named experiment and write plot-ready CSV files.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
pub struct ModelArgs {
    /// Hidden neurons of the data model, e.g. `linear:1,tanh:10`.
    #[arg(long, default_value = "linear:1,tanh:10")]
    pub neurons_data: String,
    /// Hidden neurons of the variance model.
    #[arg(long, default_value = "linear:1,tanh:10")]
    pub neurons_var: String,
    /// Comma-separated γ candidates; default 1e-6,1e-5,...,1e4.
    #[arg(long)]
    pub gamma_grid: Option<String>,
    /// Master seed for hidden layers, validation splits and generators.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = elm_pi::DEFAULT_BATCH_ROWS)]
    pub batch_rows: usize,
    /// Hold-out fraction used to validate γ.
    #[arg(long, default_value_t = 0.3)]
    pub val_fraction: f64,
    /// Train the variance model on squared leave-one-out residuals.
    #[arg(long)]
    pub leave_out: bool,
}

#[derive(Args, Clone)]
pub struct SourceArgs {
    /// CSV input file.
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,
    /// Built-in generator: `heteroscedastic`, `homoscedastic` or `skinlike`.
    #[arg(long)]
    pub synth: Option<String>,
    /// Sample count for a built-in generator.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Noise deviation of the homoscedastic generator.
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    /// Feature count of the skin-like generator.
    #[arg(long, default_value_t = 12)]
    pub features: usize,
    /// Target column: `last`, a 0-based index, or a header name.
    #[arg(long, default_value = "last")]
    pub target: String,
    /// The CSV file has no header row.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Train on this fraction and write the rest to `test.csv`.
    #[arg(long, default_value_t = 1.0)]
    pub train_fraction: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Column to drop before predicting (`last`, index or name); by default
    /// every column is a feature.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value_t = elm_pi::DEFAULT_BATCH_ROWS)]
    pub batch_rows: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Intervals CSV written by `predict`.
    #[arg(long)]
    pub intervals: PathBuf,
    /// CSV holding the true targets.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value = "last")]
    pub target: String,
    /// The truth file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Coverage level the intervals were built for (recorded in the report).
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    /// Also write a uniform-interval boundary curve with this many points.
    #[arg(long)]
    pub curve_points: Option<usize>,
    /// Directory for `eval_report.txt` and the optional curve.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// One of: artificial, decay, boundary, fp-coverage.
    pub name: String,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Training samples (fp-coverage: total samples, split in half).
    #[arg(long)]
    pub n: Option<usize>,
    /// Training-set sizes for `decay`.
    #[arg(long, default_value = "100,200,400,800,1600,3200")]
    pub n_values: String,
    /// Repetitions per size for `decay`.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    /// Feature count for `fp-coverage`.
    #[arg(long, default_value_t = 12)]
    pub features: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("ELM_PI_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("ELM_PI_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Eval(a) => commands::eval(a),
        Command::Experiment(a) => experiments::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
            eprintln!("error kind={} message=\"{message}\"", e.kind());
            ExitCode::from(2)
        }
    }
}
