//! Plot-ready two-column CSV outputs.
//!
//! Each kind reproduces one figure family: the raw rate series, the
//! normalized series, a training error curve, and test-set forecasts
//! against realized rates. Floats are printed with 17 significant digits
//! so the files are lossless and byte-stable across reruns.

use std::fmt::Write as _;
use std::path::Path;

use ratecast::data::RateSeries;
use ratecast::Date;

use crate::error::{CliError, CliResult};

/// One plottable dataset; the variant doubles as the plot kind.
#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    /// `date,rate` — the series as ingested.
    RawSeries(&'a RateSeries),
    /// `date,value` — logistic-normalized returns, dated by the later day
    /// of each return's pair.
    NormalizedSeries {
        dates: &'a [Date],
        values: &'a [f64],
    },
    /// `epoch,mse` — one row per completed epoch, 1-based.
    ErrorCurve(&'a [f64]),
    /// `actual,forecast` — equal-length columns of realized and predicted
    /// rates over the test rows.
    ForecastVsActual {
        actual: &'a [f64],
        forecast: &'a [f64],
    },
}

impl PlotData<'_> {
    /// Kind name, also used as the default file stem.
    pub fn kind_name(&self) -> &'static str {
        match self {
            PlotData::RawSeries(_) => "raw-series",
            PlotData::NormalizedSeries { .. } => "normalized-series",
            PlotData::ErrorCurve(_) => "error-curve",
            PlotData::ForecastVsActual { .. } => "forecast-vs-actual",
        }
    }
}

/// Renders one dataset to CSV text.
pub fn render_plot_csv(data: &PlotData<'_>) -> CliResult<String> {
    let mut s = String::new();
    match *data {
        PlotData::RawSeries(series) => {
            s.push_str("date,rate\n");
            for (date, rate) in series.dates().iter().zip(series.rates()) {
                let _ = writeln!(s, "{date},{rate:.16e}");
            }
        }
        PlotData::NormalizedSeries { dates, values } => {
            if dates.len() != values.len() {
                return Err(CliError::Data(format!(
                    "normalized series has {} values but {} dates",
                    values.len(),
                    dates.len()
                )));
            }
            s.push_str("date,value\n");
            for (date, v) in dates.iter().zip(values) {
                let _ = writeln!(s, "{date},{v:.16e}");
            }
        }
        PlotData::ErrorCurve(curve) => {
            s.push_str("epoch,mse\n");
            for (i, mse) in curve.iter().enumerate() {
                let _ = writeln!(s, "{},{mse:.16e}", i + 1);
            }
        }
        PlotData::ForecastVsActual { actual, forecast } => {
            if actual.len() != forecast.len() {
                return Err(CliError::Data(format!(
                    "forecast column has {} rows, actual has {}",
                    forecast.len(),
                    actual.len()
                )));
            }
            s.push_str("actual,forecast\n");
            for (a, f) in actual.iter().zip(forecast) {
                let _ = writeln!(s, "{a:.16e},{f:.16e}");
            }
        }
    }
    Ok(s)
}

/// Writes one dataset as a two-column CSV at `path`.
pub fn emit_plot_csv(data: &PlotData<'_>, path: &Path) -> CliResult<()> {
    let text = render_plot_csv(data)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(s: &str) -> Date {
        s.parse().unwrap()
    }

    #[test]
    fn error_curve_has_one_row_per_epoch() {
        let curve = [0.5, 0.25, 0.125];
        let text = render_plot_csv(&PlotData::ErrorCurve(&curve)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + curve.len());
        assert_eq!(lines[0], "epoch,mse");
        assert!(lines[1].starts_with("1,5.0000000000000000e-1"));
        assert!(lines[3].starts_with("3,1.2500000000000000e-1"));
    }

    #[test]
    fn forecast_vs_actual_requires_equal_columns() {
        let a = [4.1, 4.2];
        let f = [4.15];
        let err = render_plot_csv(&PlotData::ForecastVsActual {
            actual: &a,
            forecast: &f,
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);

        let f2 = [4.15, 4.22];
        let text = render_plot_csv(&PlotData::ForecastVsActual {
            actual: &a,
            forecast: &f2,
        })
        .unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap(), "actual,forecast");
    }

    #[test]
    fn normalized_series_lines_up_dates_and_values() {
        let dates = [day("2020-01-02"), day("2020-01-03")];
        let values = [0.25, 0.75];
        let text = render_plot_csv(&PlotData::NormalizedSeries {
            dates: &dates,
            values: &values,
        })
        .unwrap();
        assert_eq!(
            text,
            "date,value\n2020-01-02,2.5000000000000000e-1\n2020-01-03,7.5000000000000000e-1\n"
        );

        let short = [0.5];
        assert!(render_plot_csv(&PlotData::NormalizedSeries {
            dates: &dates,
            values: &short,
        })
        .is_err());
    }

    #[test]
    fn raw_series_round_trips_through_the_loader() {
        let series = RateSeries::new(
            vec![day("2021-03-01"), day("2021-03-02")],
            vec![4.123456789012345, 4.2],
            "t",
        )
        .unwrap();
        let text = render_plot_csv(&PlotData::RawSeries(&series)).unwrap();
        let back = ratecast::data::load_rate_series(text.as_bytes(), "t").unwrap();
        assert_eq!(back.rates(), series.rates());
        assert_eq!(back.dates(), series.dates());
    }

    #[test]
    fn kind_names_match_the_file_stems() {
        let curve = [0.1];
        assert_eq!(PlotData::ErrorCurve(&curve).kind_name(), "error-curve");
    }
}
