//! Batch command-line front end for the forecasting toolkit: synthetic
//! data generation, preprocessing, training, evaluation, forecasting, and
//! the four-way trainer comparison.
//!
//! Everything here is deterministic by construction — artifacts carry no
//! timestamps, floats are printed with 17 significant digits, and all
//! randomness flows from explicit seeds — so the same invocation produces
//! byte-identical outputs.

pub mod args;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod plots;

pub use error::{CliError, CliResult};

/// Dispatches a parsed invocation.
pub fn run(cli: &args::Cli) -> CliResult<()> {
    match &cli.command {
        args::Command::Synth(a) => commands::synth::run(a),
        args::Command::Preprocess(a) => commands::preprocess::run(a),
        args::Command::Train(a) => commands::train::run(a),
        args::Command::Evaluate(a) => commands::evaluate::run(a),
        args::Command::Forecast(a) => commands::forecast::run(a),
        args::Command::Compare(a) => commands::compare::run(a),
    }
}
