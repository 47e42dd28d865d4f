//! `forecast`: one-step-ahead rate forecast from the end of a series.

use crate::args::ForecastArgs;
use crate::checkpoint::load_checkpoint;
use crate::error::CliResult;
use crate::pipeline::{end_forecast, load_series_file, Prepared};

pub fn run(args: &ForecastArgs) -> CliResult<()> {
    let ck = load_checkpoint(&args.checkpoint)?;
    let window = ck.model.layer_sizes()[0];
    let series = load_series_file(&args.data)?;
    let prepared = Prepared::with_params(series, ck.params, window)?;

    let last_date = prepared.series.dates()[prepared.series.len() - 1];
    let last_rate = prepared.series.rates()[prepared.series.len() - 1];
    let f = end_forecast(&ck.model, &prepared)?;

    println!(
        "model: {} {}-{}-{} (seed {}, config {})",
        ck.model.kind_name(),
        window,
        ck.model.layer_sizes()[1],
        ck.model.layer_sizes()[2],
        ck.seed,
        ck.config_hash,
    );
    println!("last observation: {last_rate:.16e} on {last_date}");
    println!("forecast: {:.16e}", f.rate);
    println!(
        "raw output: {:.16e} (clamped: {})",
        f.raw_output,
        if f.clamped { "yes" } else { "no" }
    );
    Ok(())
}
