//! `evaluate`: score a checkpoint on the test split of a series.
//!
//! The data is taken through the normalization the checkpoint was trained
//! with. Metrics are computed on normalized values (directional accuracy
//! on the denormalized returns); the forecast-vs-actual CSV is written in
//! rate space.

use ratecast::evaluate::{evaluate_forecasts, Metrics};
use ratecast::preprocess::split_index;

use crate::args::EvaluateArgs;
use crate::checkpoint::load_checkpoint;
use crate::config::{resolve_out_dir, DEFAULT_SPLIT};
use crate::error::{CliError, CliResult};
use crate::pipeline::{clamp_predictions, load_series_file, predict_all, rate_forecasts, Prepared};
use crate::plots::{emit_plot_csv, PlotData};

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let split = args.split.unwrap_or(DEFAULT_SPLIT);
    if !(split > 0.0 && split < 1.0) {
        return Err(CliError::Usage(format!(
            "--split must lie strictly in (0,1), got {split}"
        )));
    }
    let out_dir = resolve_out_dir(args.out.clone(), None);

    let ck = load_checkpoint(&args.checkpoint)?;
    let window = ck.model.layer_sizes()[0];
    let series = load_series_file(&args.data)?;
    let prepared = Prepared::with_params(series, ck.params, window)?;
    let split_row = split_index(prepared.set.len(), split)?;
    let test_rows = split_row..prepared.set.len();

    let raw = predict_all(&ck.model, &prepared.set)?;
    let raw_test = &raw[test_rows.clone()];
    let predicted = clamp_predictions(raw_test);
    let targets = &prepared.set.targets()[test_rows.clone()];
    let metrics = evaluate_forecasts(&predicted, targets, &prepared.params)?;
    let (actual, forecast, clamped) = rate_forecasts(&prepared, test_rows.clone(), raw_test)?;

    std::fs::create_dir_all(&out_dir)?;
    let fva = PlotData::ForecastVsActual {
        actual: &actual,
        forecast: &forecast,
    };
    let fva_path = out_dir.join(format!("{}.csv", fva.kind_name()));
    emit_plot_csv(&fva, &fva_path)?;
    let metrics_path = out_dir.join("metrics.csv");
    std::fs::write(
        &metrics_path,
        format!("{}\n{}\n", Metrics::csv_header(), metrics.to_csv_row()),
    )?;

    println!(
        "evaluated {} {}-{}-{} checkpoint on {}: {} test rows of {}",
        ck.model.kind_name(),
        window,
        ck.model.layer_sizes()[1],
        ck.model.layer_sizes()[2],
        prepared.series.label(),
        test_rows.len(),
        prepared.set.len(),
    );
    println!(
        "mse={:.16e} rmse={:.16e} mae={:.16e} directional-accuracy={:.4}",
        metrics.mse, metrics.rmse, metrics.mae, metrics.directional_accuracy
    );
    println!("clamped outputs: {clamped} of {}", test_rows.len());
    println!("wrote {}", metrics_path.display());
    println!("wrote {}", fva_path.display());
    Ok(())
}
