//! `preprocess`: derive returns and the normalized series from a rates
//! file, and write both plot CSVs.

use crate::args::PreprocessArgs;
use crate::config::{parse_mode, resolve_out_dir};
use crate::error::CliResult;
use crate::pipeline::{load_series_file, Prepared};
use crate::plots::{emit_plot_csv, PlotData};

pub fn run(args: &PreprocessArgs) -> CliResult<()> {
    let mode = parse_mode(args.mode.as_deref())?;
    let out_dir = resolve_out_dir(args.out.clone(), None);

    let series = load_series_file(&args.data)?;
    // Windowing is not needed here, but `Prepared` wants one; the smallest
    // window keeps the requirements minimal (3 rates suffice).
    let prepared = Prepared::fit(series, mode, 1)?;

    std::fs::create_dir_all(&out_dir)?;
    let raw = PlotData::RawSeries(&prepared.series);
    let raw_path = out_dir.join(format!("{}.csv", raw.kind_name()));
    emit_plot_csv(&raw, &raw_path)?;

    // Each return is dated by the later day of its pair.
    let normalized = PlotData::NormalizedSeries {
        dates: &prepared.series.dates()[1..],
        values: prepared.normalized.values(),
    };
    let normalized_path = out_dir.join(format!("{}.csv", normalized.kind_name()));
    emit_plot_csv(&normalized, &normalized_path)?;

    println!(
        "series {}: {} rows, {} to {}",
        prepared.series.label(),
        prepared.series.len(),
        prepared.series.dates()[0],
        prepared.series.dates()[prepared.series.len() - 1],
    );
    println!(
        "returns ({}): {} values, mean={:.16e}, std={:.16e}",
        prepared.params.mode,
        prepared.normalized.values().len(),
        prepared.params.mean,
        prepared.params.std,
    );
    println!("wrote {}", raw_path.display());
    println!("wrote {}", normalized_path.display());
    Ok(())
}
