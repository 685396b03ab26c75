//! `tsad` — anomaly detection for multivariate time series with a
//! bidirectional LSTM autoencoder.
//!
//! One binary, five subcommands covering the full pipeline:
//!
//! ```text
//! tsad synth   --out data.csv --seed 7            # labeled synthetic series
//! tsad train   --data data.csv --out-dir run/     # model.bin + curves.csv
//! tsad detect  --data data.csv --model run/model.bin --out-dir run/
//! tsad eval    --report run/report.csv --data data.csv --out-dir run/ --plots
//! tsad compare --report-a a.csv --report-b b.csv --data data.csv --out-dir run/
//! ```
//!
//! Every command writes a `<command>_manifest.json` next to its
//! artifacts with flags, input/output SHA-256 digests, and stage counts.
//! Exit codes: 0 when every artifact was written, 1 on pipeline errors
//! (the message names the failing stage), 2 on usage errors.

mod commands;
mod manifest;
mod pipeline;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tsad_core::data::{AnomalyKind, ScalerMode};
use tsad_core::detect::ThresholdStrategy;
use tsad_core::model::Architecture;

#[derive(Parser)]
#[command(
    name = "tsad",
    version,
    about = "Bidirectional-LSTM autoencoder anomaly detection for multivariate time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic series as CSV
    Synth(SynthArgs),
    /// Fit an autoencoder on the normal portion of a series
    Train(TrainArgs),
    /// Score windows against a trained model and flag anomalies
    Detect(DetectArgs),
    /// Evaluate a detection report against ground-truth labels
    Eval(EvalArgs),
    /// Evaluate two detection reports side by side
    Compare(CompareArgs),
}

fn parse_kind(raw: &str) -> Result<AnomalyKind, String> {
    raw.parse().map_err(|e| format!("{e}"))
}

fn parse_scaler(raw: &str) -> Result<ScalerMode, String> {
    raw.parse().map_err(|e| format!("{e}"))
}

fn parse_threshold(raw: &str) -> Result<ThresholdStrategy, String> {
    raw.parse().map_err(|e| format!("{e}"))
}

fn parse_baseline(raw: &str) -> Result<Architecture, String> {
    match raw {
        "lstm" => Ok(Architecture::Unidirectional),
        other => Err(format!(
            "unknown baseline {other:?}; the only supported baseline is \"lstm\""
        )),
    }
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Number of rows to generate
    #[arg(long, default_value_t = 5000)]
    pub rows: usize,
    /// Fraction of rows labeled anomalous (exactly round(rows * fraction))
    #[arg(long, default_value_t = 0.02)]
    pub anomaly_fraction: f64,
    /// Comma-separated anomaly kinds: spike, level_shift, noise_burst
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_kind,
        default_value = "spike,level_shift,noise_burst"
    )]
    pub kinds: Vec<AnomalyKind>,
    /// Earliest event start, as a fraction of the series; set past the
    /// train ratio to keep the training portion anomaly-free
    #[arg(long, default_value_t = 0.0)]
    pub anomaly_start_fraction: f64,
    /// Shortest anomaly event, in rows
    #[arg(long, default_value_t = 40)]
    pub event_len_min: usize,
    /// Longest anomaly event, in rows
    #[arg(long, default_value_t = 80)]
    pub event_len_max: usize,
    /// Generator seed
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Manifest path; defaults to synth_manifest.json beside --out
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Input CSV (timestamp,V,Vs,D,T,y,label)
    #[arg(long)]
    pub data: PathBuf,
    /// Directory for model.bin, curves.csv, and the manifest
    #[arg(long, default_value = ".", env = "TSAD_OUT_DIR")]
    pub out_dir: PathBuf,
    /// Window length in timesteps
    #[arg(long, default_value_t = 10)]
    pub lookback: usize,
    /// Comma-separated encoder hidden widths, outermost first; the
    /// decoder mirrors them
    #[arg(long, value_delimiter = ',', default_value = "64,32")]
    pub widths: Vec<usize>,
    /// Train the unidirectional baseline instead of the default
    /// bidirectional model; the only accepted value is "lstm"
    #[arg(long, value_parser = parse_baseline)]
    pub baseline: Option<Architecture>,
    /// Chronological train fraction; the rest is the test portion
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
    /// Feature scaling fitted on training rows: minmax or zscore
    #[arg(long, value_parser = parse_scaler, default_value = "minmax")]
    pub scaler: ScalerMode,
    #[arg(long, default_value_t = 0.0001)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    /// Fraction of training windows held out for the validation curve
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    /// Global gradient-norm clip; 0 disables
    #[arg(long, default_value_t = 5.0)]
    pub clip_norm: f64,
    /// Stop after this many epochs without validation improvement
    #[arg(long)]
    pub patience: Option<usize>,
    /// Seeds weight initialization and epoch shuffling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for gradient computation; results are
    /// bit-identical for a fixed thread count
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Args)]
pub struct DetectArgs {
    /// Input CSV; must be prepared with the same split and scaler flags
    /// the model was trained with
    #[arg(long)]
    pub data: PathBuf,
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,
    /// Directory for report.csv and the manifest
    #[arg(long, default_value = ".", env = "TSAD_OUT_DIR")]
    pub out_dir: PathBuf,
    /// Threshold strategy: max, quantile:Q, mean_plus_k_std:K, or fixed:V
    #[arg(long, value_parser = parse_threshold, default_value = "quantile:0.99")]
    pub threshold: ThresholdStrategy,
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
    #[arg(long, value_parser = parse_scaler, default_value = "minmax")]
    pub scaler: ScalerMode,
    /// Worker threads for window scoring; results are bit-identical for
    /// any thread count
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Detection report CSV (window_end_index,loss,flag)
    #[arg(long)]
    pub report: PathBuf,
    /// The CSV the report was produced from; supplies ground truth
    #[arg(long)]
    pub data: PathBuf,
    /// Train ratio used when the report was produced
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
    /// Directory for metrics.csv, confusion.csv, roc.csv, and plots
    #[arg(long, default_value = ".", env = "TSAD_OUT_DIR")]
    pub out_dir: PathBuf,
    /// Also write SVG charts: loss histogram, loss scatter, ROC curve
    #[arg(long)]
    pub plots: bool,
}

#[derive(Args)]
pub struct CompareArgs {
    /// First detection report CSV
    #[arg(long)]
    pub report_a: PathBuf,
    /// Second detection report CSV, over the same windows
    #[arg(long)]
    pub report_b: PathBuf,
    /// The CSV both reports were produced from
    #[arg(long)]
    pub data: PathBuf,
    /// Train ratio used when the reports were produced
    #[arg(long, default_value_t = 0.7)]
    pub train_ratio: f64,
    /// Directory for comparison.csv and the manifest
    #[arg(long, default_value = ".", env = "TSAD_OUT_DIR")]
    pub out_dir: PathBuf,
    /// Row label for the first report
    #[arg(long, default_value = "model-a")]
    pub name_a: String,
    /// Row label for the second report
    #[arg(long, default_value = "model-b")]
    pub name_b: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => commands::synth(args),
        Command::Train(args) => commands::train(args),
        Command::Detect(args) => commands::detect(args),
        Command::Eval(args) => commands::eval(args),
        Command::Compare(args) => commands::compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
