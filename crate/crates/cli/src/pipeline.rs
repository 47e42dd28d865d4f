//! The shared data path: load or generate a series, derive returns,
//! normalize, window — plus the prediction walks that `evaluate`,
//! `forecast`, and `compare` all share.

use std::path::Path;

use ratecast::data::{generate_synthetic, load_rate_series, RateSeries};
use ratecast::elman::{elman_step, HiddenState};
use ratecast::evaluate::{one_step_forecast, Forecast, ForecastModel, OUTPUT_CLAMP};
use ratecast::mlp::mlp_forward;
use ratecast::preprocess::{
    denormalize_value, fit_normalizer, invert_returns, log_returns, make_windows, normalize,
    NormalizationParams, NormalizedSeries, ReturnMode, SupervisedSet,
};

use crate::checkpoint::SavedModel;
use crate::config::DataSource;
use crate::error::{CliError, CliResult};

/// Loads the series a source points at. Synthetic-parameter problems are
/// usage errors — every value involved came from the invocation.
pub fn load_source(source: &DataSource) -> CliResult<RateSeries> {
    match source {
        DataSource::File(path) => load_series_file(path),
        DataSource::Synthetic { kind, n, seed } => {
            generate_synthetic(kind, *n, *seed).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Loads a `date,rate` CSV, labeling the series by its file stem.
pub fn load_series_file(path: &Path) -> CliResult<RateSeries> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    Ok(load_rate_series(file, &label)?)
}

/// A series taken through returns, normalization, and windowing.
#[derive(Debug)]
pub struct Prepared {
    pub series: RateSeries,
    pub params: NormalizationParams,
    pub normalized: NormalizedSeries,
    pub set: SupervisedSet,
}

impl Prepared {
    /// Fits the normalizer on the series' own returns.
    pub fn fit(series: RateSeries, mode: ReturnMode, window: usize) -> CliResult<Self> {
        let returns = log_returns(&series, mode)?;
        let params = fit_normalizer(&returns)?;
        Self::assemble(series, params, window)
    }

    /// Applies normalization statistics fitted elsewhere — scoring and
    /// forecasting must see data through the lens the model was trained
    /// with.
    pub fn with_params(
        series: RateSeries,
        params: NormalizationParams,
        window: usize,
    ) -> CliResult<Self> {
        Self::assemble(series, params, window)
    }

    fn assemble(
        series: RateSeries,
        params: NormalizationParams,
        window: usize,
    ) -> CliResult<Self> {
        let returns = log_returns(&series, params.mode)?;
        let normalized = normalize(&returns, &params)?;
        let set = make_windows(&normalized, window)?;
        Ok(Prepared {
            series,
            params,
            normalized,
            set,
        })
    }

    pub fn window(&self) -> usize {
        self.set.window()
    }

    /// Normalized values available for training when the first `split_row`
    /// windows are the training rows: everything up to and including the
    /// last training target.
    pub fn train_values(&self, split_row: usize) -> CliResult<NormalizedSeries> {
        let end = split_row + self.window();
        Ok(NormalizedSeries::new(
            self.normalized.values()[..end].to_vec(),
        )?)
    }
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(OUTPUT_CLAMP, 1.0 - OUTPUT_CLAMP)
}

/// Raw model outputs for every supervised row, in row order.
///
/// The feedforward net scores rows independently; the recurrent net walks
/// them in sequence from a zero hidden state, exactly as it consumes a
/// stream during training, so test-row predictions are conditioned on the
/// full history before them.
pub fn predict_all(model: &SavedModel, set: &SupervisedSet) -> CliResult<Vec<f64>> {
    let mut out = Vec::with_capacity(set.len());
    match model {
        SavedModel::Feedforward(net) => {
            for i in 0..set.len() {
                let (y, _) = mlp_forward(net, set.inputs().row(i))?;
                out.push(y[0]);
            }
        }
        SavedModel::Elman(net) => {
            let mut state = HiddenState::zero(net.layer_sizes()[1]);
            for i in 0..set.len() {
                let (y, next) = elman_step(net, &state, set.inputs().row(i))?;
                out.push(y);
                state = next;
            }
        }
    }
    Ok(out)
}

/// Predictions clamped into (0,1), ready for metric computation.
pub fn clamp_predictions(raw: &[f64]) -> Vec<f64> {
    raw.iter().copied().map(clamp_unit).collect()
}

/// Rate-space forecasts for rows `rows.start..rows.end`, from the raw
/// predictions for those rows.
///
/// Row `i` predicts the normalized return with index `i + window`, so its
/// last known rate is `rates[i + window]` and the realized next rate is
/// `rates[i + window + 1]`. Returns (actual, forecast, clamped count).
pub fn rate_forecasts(
    prepared: &Prepared,
    rows: std::ops::Range<usize>,
    raw_predictions: &[f64],
) -> CliResult<(Vec<f64>, Vec<f64>, usize)> {
    if raw_predictions.len() != rows.len() {
        return Err(CliError::Data(format!(
            "{} predictions for {} rows",
            raw_predictions.len(),
            rows.len()
        )));
    }
    let w = prepared.window();
    let rates = prepared.series.rates();
    let mut actual = Vec::with_capacity(rows.len());
    let mut forecast = Vec::with_capacity(rows.len());
    let mut clamped = 0usize;
    for (i, &raw) in rows.zip(raw_predictions) {
        let squashed = clamp_unit(raw);
        if squashed != raw {
            clamped += 1;
        }
        let ret = denormalize_value(squashed, &prepared.params)?;
        let last_rate = rates[i + w];
        forecast.push(invert_returns(last_rate, ret, prepared.params.mode)?);
        actual.push(rates[i + w + 1]);
    }
    Ok((actual, forecast, clamped))
}

/// One-step-ahead forecast from the very end of the series: the recurrent
/// net first walks every supervised row to build up its hidden state, then
/// both kinds score the final (targetless) window against the last rate.
pub fn end_forecast(model: &SavedModel, prepared: &Prepared) -> CliResult<Forecast> {
    let values = prepared.normalized.values();
    let w = prepared.window();
    let tail = &values[values.len() - w..];
    let last_rate = *prepared
        .series
        .rates()
        .last()
        .expect("a prepared series is never empty");
    let forecast = match model {
        SavedModel::Feedforward(net) => {
            one_step_forecast(ForecastModel::Feedforward(net), tail, &prepared.params, last_rate)?
        }
        SavedModel::Elman(net) => {
            let mut state = HiddenState::zero(net.layer_sizes()[1]);
            for i in 0..prepared.set.len() {
                let (_, next) = elman_step(net, &state, prepared.set.inputs().row(i))?;
                state = next;
            }
            one_step_forecast(
                ForecastModel::Recurrent(net, &state),
                tail,
                &prepared.params,
                last_rate,
            )?
        }
    };
    Ok(forecast)
}
