//! Command-line surface: subcommands and their flags.
//!
//! Flags are thin and untyped where values need cross-field validation
//! (model/trainer names, return modes); `config.rs` turns them into
//! validated settings so every bad combination is reported as a usage
//! error before any work happens.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ratecast",
    version,
    about = "Daily exchange-rate forecasting with feedforward and recurrent networks",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic daily rate series as date,rate CSV
    Synth(SynthArgs),
    /// Compute returns and the normalized series for a rates file
    Preprocess(PreprocessArgs),
    /// Train a model; write a checkpoint and its error curve
    Train(TrainArgs),
    /// Score a checkpoint on the test split of a rates file
    Evaluate(EvaluateArgs),
    /// One-step-ahead rate forecast from the end of a series
    Forecast(ForecastArgs),
    /// Train every configuration on one dataset and compare them
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Series family: gbm-walk | noisy-sine | nonlinear-ar
    #[arg(long)]
    pub kind: String,
    /// Number of daily rows to generate
    #[arg(long)]
    pub n: usize,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,

    /// Starting rate (gbm-walk, nonlinear-ar)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub start: Option<f64>,
    /// Per-step log drift (gbm-walk)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub drift: Option<f64>,
    /// Per-step log volatility (gbm-walk)
    #[arg(long, help_heading = "Series parameters")]
    pub volatility: Option<f64>,
    /// Base level (noisy-sine)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub level: Option<f64>,
    /// Seasonal amplitude (noisy-sine)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub amplitude: Option<f64>,
    /// Season length in steps (noisy-sine)
    #[arg(long, help_heading = "Series parameters")]
    pub period: Option<f64>,
    /// Additive noise level (noisy-sine, nonlinear-ar)
    #[arg(long, help_heading = "Series parameters")]
    pub noise: Option<f64>,
    /// tanh gain on the previous return (nonlinear-ar)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub a: Option<f64>,
    /// tanh steepness (nonlinear-ar)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub b: Option<f64>,
    /// Linear weight on the return two steps back (nonlinear-ar)
    #[arg(long, allow_negative_numbers = true, help_heading = "Series parameters")]
    pub c: Option<f64>,
    /// Return-to-log-rate coupling (nonlinear-ar)
    #[arg(long, help_heading = "Series parameters")]
    pub scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Input date,rate CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Return transform: log-diff | log-ratio
    #[arg(long)]
    pub mode: Option<String>,
    /// Output directory (default: $RATECAST_OUT_DIR or ./ratecast-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    /// TOML config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input date,rate CSV (alternative to --synthetic)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Inline synthetic source with default parameters:
    /// gbm-walk | noisy-sine | nonlinear-ar
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Length of the inline synthetic series (with --synthetic)
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the inline synthetic series (with --synthetic)
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Return transform: log-diff | log-ratio
    #[arg(long)]
    pub mode: Option<String>,
    /// Input window length
    #[arg(long)]
    pub window: Option<usize>,
    /// Chronological train fraction, strictly in (0,1)
    #[arg(long)]
    pub split: Option<f64>,
    /// Model kind: ff | elman
    #[arg(long)]
    pub model: Option<String>,
    /// Hidden layer width (default 40 for ff, 10 for elman)
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Trainer: backprop | rprop+ | irprop+ | ekf
    #[arg(long)]
    pub trainer: Option<String>,
    /// Weight-initialization seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-width of the uniform weight initialization
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// Epoch budget (default 1000 for ff trainers, 50 for ekf)
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Stop once the epoch error reaches this level
    #[arg(long)]
    pub target_mse: Option<f64>,
    /// Learning rate (backprop only)
    #[arg(long)]
    pub rate: Option<f64>,
    /// Output directory (default: $RATECAST_OUT_DIR or ./ratecast-out)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Number of parallel training streams
    #[arg(long, help_heading = "EKF (elman) options")]
    pub streams: Option<usize>,
    /// Length of each stream in series values
    #[arg(long, help_heading = "EKF (elman) options")]
    pub stream_length: Option<usize>,
    /// Backpropagation-through-time depth (default: the window)
    #[arg(long, help_heading = "EKF (elman) options")]
    pub tbptt_window: Option<usize>,
    /// Initial covariance diagonal
    #[arg(long, help_heading = "EKF (elman) options")]
    pub p0: Option<f64>,
    /// Kalman learning rate
    #[arg(long, help_heading = "EKF (elman) options")]
    pub eta: Option<f64>,
    /// Process noise added to the covariance diagonal each step
    #[arg(long, help_heading = "EKF (elman) options")]
    pub q: Option<f64>,
    /// Redraw stream starts each epoch (true) or fix them once (false)
    #[arg(long, help_heading = "EKF (elman) options")]
    pub resample: Option<bool>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Checkpoint written by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Input date,rate CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Chronological train fraction, strictly in (0,1)
    #[arg(long)]
    pub split: Option<f64>,
    /// Output directory (default: $RATECAST_OUT_DIR or ./ratecast-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Checkpoint written by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Input date,rate CSV
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct CompareArgs {
    /// Input date,rate CSV (alternative to --synthetic)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Inline synthetic source with default parameters:
    /// gbm-walk | noisy-sine | nonlinear-ar
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Length of the inline synthetic series (with --synthetic)
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the inline synthetic series (with --synthetic)
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Return transform: log-diff | log-ratio
    #[arg(long)]
    pub mode: Option<String>,
    /// Input window length
    #[arg(long)]
    pub window: Option<usize>,
    /// Chronological train fraction, strictly in (0,1)
    #[arg(long)]
    pub split: Option<f64>,
    /// Weight-initialization seed, shared by all four runs
    #[arg(long)]
    pub seed: Option<u64>,
    /// Epoch budget for the feedforward trainers
    #[arg(long)]
    pub epochs_ff: Option<usize>,
    /// Epoch budget for the Kalman trainer
    #[arg(long)]
    pub epochs_ekf: Option<usize>,
    /// Stop once the epoch error reaches this level
    #[arg(long)]
    pub target_mse: Option<f64>,
    /// Learning rate for the backprop run
    #[arg(long)]
    pub rate: Option<f64>,
    /// Output directory (default: $RATECAST_OUT_DIR or ./ratecast-out)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Number of parallel training streams
    #[arg(long, help_heading = "EKF (elman) options")]
    pub streams: Option<usize>,
    /// Length of each stream in series values
    #[arg(long, help_heading = "EKF (elman) options")]
    pub stream_length: Option<usize>,
    /// Backpropagation-through-time depth (default: the window)
    #[arg(long, help_heading = "EKF (elman) options")]
    pub tbptt_window: Option<usize>,
    /// Initial covariance diagonal
    #[arg(long, help_heading = "EKF (elman) options")]
    pub p0: Option<f64>,
    /// Kalman learning rate
    #[arg(long, help_heading = "EKF (elman) options")]
    pub eta: Option<f64>,
    /// Process noise added to the covariance diagonal each step
    #[arg(long, help_heading = "EKF (elman) options")]
    pub q: Option<f64>,
    /// Redraw stream starts each epoch (true) or fix them once (false)
    #[arg(long, help_heading = "EKF (elman) options")]
    pub resample: Option<bool>,
}
