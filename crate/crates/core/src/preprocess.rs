//! Rate-to-return transforms, logistic normalization, and supervised shaping.
//!
//! The pipeline is: rates → logarithmic returns → logistic squashing into
//! `(0,1)` → sliding windows of the last `W` values predicting the next one.
//! Two return conventions are supported:
//!
//! * `log-diff` (default): `R_n = ln(E_n / E_{n-1})` — the standard
//!   financial log return;
//! * `log-ratio`: `R_n = ln(E_n) / ln(E_{n-1})` — a ratio-of-logs variant
//!   kept selectable for literal replication of sources that define it
//!   this way. It is undefined when a denominator rate equals 1 exactly.
//!
//! Normalization squashes returns with the logistic map
//! `R~ = 1 / (1 + exp((R - mean)/std))`. Note the positive exponent: the
//! map is strictly **decreasing** in `R`, so a rising rate maps to a
//! falling normalized value. Consumers that care about direction (e.g.
//! directional accuracy) must compare signs after denormalizing, never in
//! normalized space.

use crate::error::{Error, Result};
use crate::data::RateSeries;
use crate::linalg::Matrix;

/// Which return transform produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnMode {
    /// `R_n = ln(E_n / E_{n-1})`.
    LogDiff,
    /// `R_n = ln(E_n) / ln(E_{n-1})`.
    LogRatio,
}

impl ReturnMode {
    pub fn name(self) -> &'static str {
        match self {
            ReturnMode::LogDiff => "log-diff",
            ReturnMode::LogRatio => "log-ratio",
        }
    }
}

impl std::fmt::Display for ReturnMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ReturnMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-diff" => Ok(ReturnMode::LogDiff),
            "log-ratio" => Ok(ReturnMode::LogRatio),
            other => Err(Error::Parse(format!(
                "unknown return mode {other:?}, expected `log-diff` or `log-ratio`"
            ))),
        }
    }
}

/// Dimensionless returns derived from a rate series; one element shorter
/// than its source.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    mode: ReturnMode,
}

impl ReturnSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> ReturnMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean and sample standard deviation of a return series, carried together
/// with the return mode so forecasts can be inverted consistently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationParams {
    pub mean: f64,
    pub std: f64,
    pub mode: ReturnMode,
}

/// Returns squashed into the open unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    values: Vec<f64>,
}

impl NormalizedSeries {
    /// Wraps a pre-squashed buffer, enforcing the `(0,1)` invariant.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!(
                    "normalized value at {i} must lie strictly in (0,1), got {v}"
                )));
            }
        }
        Ok(NormalizedSeries { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Windowed samples: row `i` holds `values[i..i+W)`, target `i` is
/// `values[i+W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    inputs: Matrix,
    targets: Vec<f64>,
}

impl SupervisedSet {
    /// Wraps an input matrix and parallel target vector.
    pub fn new(inputs: Matrix, targets: Vec<f64>) -> Result<Self> {
        if inputs.rows() != targets.len() {
            return Err(Error::Shape(format!(
                "{} input rows but {} targets",
                inputs.rows(),
                targets.len()
            )));
        }
        Ok(SupervisedSet { inputs, targets })
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Window length (input columns).
    pub fn window(&self) -> usize {
        self.inputs.cols()
    }
}

/// Computes logarithmic returns of a rate series under the given mode.
///
/// In `log-ratio` mode a denominator rate of exactly 1 makes the formula
/// undefined and is rejected.
pub fn log_returns(series: &RateSeries, mode: ReturnMode) -> Result<ReturnSeries> {
    let rates = series.rates();
    if let ReturnMode::LogRatio = mode {
        // Only rates used as denominators matter, i.e. all but the last.
        if let Some(i) = rates[..rates.len() - 1].iter().position(|&r| r == 1.0) {
            return Err(Error::Domain(format!(
                "log-ratio returns undefined: rate at row {i} equals 1 exactly (ln = 0 denominator)"
            )));
        }
    }
    let values = rates
        .windows(2)
        .map(|w| match mode {
            ReturnMode::LogDiff => (w[1] / w[0]).ln(),
            ReturnMode::LogRatio => w[1].ln() / w[0].ln(),
        })
        .collect();
    Ok(ReturnSeries { values, mode })
}

/// Fits the normalization statistics: arithmetic mean and sample (n−1)
/// standard deviation. Rejects series shorter than 2 or with zero spread.
pub fn fit_normalizer(returns: &ReturnSeries) -> Result<NormalizationParams> {
    let v = returns.values();
    if v.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 returns to fit a normalizer, got {}",
            v.len()
        )));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    if std == 0.0 {
        return Err(Error::Domain(
            "returns have zero variance; normalization is undefined".into(),
        ));
    }
    Ok(NormalizationParams {
        mean,
        std,
        mode: returns.mode(),
    })
}

/// Logistic squashing of one return: `1 / (1 + exp((r - mean)/std))`.
///
/// Evaluated branch-wise for accuracy on both tails, and clamped to the
/// largest representable open interval so the `(0,1)` invariant survives
/// arguments extreme enough to saturate double precision.
pub fn normalize_value(r: f64, params: &NormalizationParams) -> f64 {
    let u = (r - params.mean) / params.std;
    let v = if u >= 0.0 {
        let e = (-u).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + u.exp())
    };
    v.clamp(f64::MIN_POSITIVE, 1.0_f64.next_down())
}

/// Inverse of [`normalize_value`]: `r = mean + std * ln(1/v - 1)`.
///
/// Fails unless `v` lies strictly inside `(0,1)`.
pub fn denormalize_value(v: f64, params: &NormalizationParams) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!(
            "cannot denormalize {v}: value must lie strictly in (0,1)"
        )));
    }
    Ok(params.mean + params.std * ((1.0 - v) / v).ln())
}

/// Squashes a whole return series into `(0,1)`.
pub fn normalize(returns: &ReturnSeries, params: &NormalizationParams) -> Result<NormalizedSeries> {
    if params.std.is_nan() || params.std <= 0.0 {
        return Err(Error::Domain(format!(
            "normalization std must be > 0, got {}",
            params.std
        )));
    }
    let values = returns
        .values()
        .iter()
        .map(|&r| normalize_value(r, params))
        .collect();
    NormalizedSeries::new(values)
}

/// Maps a normalized series back to returns.
pub fn denormalize(values: &NormalizedSeries, params: &NormalizationParams) -> Result<ReturnSeries> {
    let out = values
        .values()
        .iter()
        .map(|&v| denormalize_value(v, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReturnSeries {
        values: out,
        mode: params.mode,
    })
}

/// Reconstructs the next rate from the last observed rate and a predicted
/// return: `E * exp(R)` in log-diff mode, `exp(R * ln(E))` in log-ratio
/// mode.
pub fn invert_returns(last_rate: f64, predicted_return: f64, mode: ReturnMode) -> Result<f64> {
    if !(last_rate > 0.0 && last_rate.is_finite()) {
        return Err(Error::Domain(format!(
            "last rate must be finite and > 0, got {last_rate}"
        )));
    }
    if !predicted_return.is_finite() {
        return Err(Error::Domain(format!(
            "predicted return must be finite, got {predicted_return}"
        )));
    }
    match mode {
        ReturnMode::LogDiff => Ok(last_rate * predicted_return.exp()),
        ReturnMode::LogRatio => {
            if last_rate == 1.0 {
                return Err(Error::Domain(
                    "log-ratio inversion undefined when the last rate equals 1".into(),
                ));
            }
            Ok((predicted_return * last_rate.ln()).exp())
        }
    }
}

/// Cuts a normalized series into sliding windows: one sample per position,
/// inputs `values[i..i+window)`, target `values[i+window]`.
pub fn make_windows(values: &NormalizedSeries, window: usize) -> Result<SupervisedSet> {
    if window == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    let v = values.values();
    if v.len() <= window {
        return Err(Error::Domain(format!(
            "{} values with window {window} leave no target; need strictly more values than the window",
            v.len()
        )));
    }
    let rows = v.len() - window;
    let mut inputs = Matrix::zeros(rows, window);
    let mut targets = Vec::with_capacity(rows);
    for i in 0..rows {
        inputs.row_mut(i).copy_from_slice(&v[i..i + window]);
        targets.push(v[i + window]);
    }
    SupervisedSet::new(inputs, targets)
}

/// Index of the first test row for an `n_rows`-sample chronological split:
/// `floor(ratio * n_rows)` train rows come first, the rest are test.
/// Fails if either side would be empty.
pub fn split_index(n_rows: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!(
            "split ratio must lie strictly in (0,1), got {ratio}"
        )));
    }
    let r0 = (ratio * n_rows as f64).floor() as usize;
    if r0 == 0 || r0 >= n_rows {
        return Err(Error::Domain(format!(
            "split of {n_rows} rows at ratio {ratio} leaves an empty side ({r0} train)"
        )));
    }
    Ok(r0)
}

/// Chronological train/test split: the first `floor(ratio*N)` rows train,
/// the remainder test. No shuffling — order is the whole point of a
/// time-series split.
pub fn split_train_test(set: &SupervisedSet, ratio: f64) -> Result<(SupervisedSet, SupervisedSet)> {
    let r0 = split_index(set.len(), ratio)?;
    let w = set.window();
    let take = |lo: usize, hi: usize| -> Result<SupervisedSet> {
        let mut inputs = Matrix::zeros(hi - lo, w);
        for (dst, src) in (lo..hi).enumerate() {
            inputs.row_mut(dst).copy_from_slice(set.inputs().row(src));
        }
        SupervisedSet::new(inputs, set.targets()[lo..hi].to_vec())
    };
    Ok((take(0, r0)?, take(r0, set.len())?))
}
