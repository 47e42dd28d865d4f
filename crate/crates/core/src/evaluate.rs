//! Held-out scoring, rate-space forecasting, and run comparison.
//!
//! Error metrics are computed in normalized space, where the models
//! actually train. Directional accuracy is the exception: the logistic
//! squashing used by the preprocessing pipeline is *decreasing*, so sign
//! agreement is only meaningful after mapping both sequences back to
//! returns — comparing normalized values directly would silently invert
//! every verdict.

use crate::elman::{elman_step, ElmanNetwork, HiddenState};
use crate::error::{Error, Result};
use crate::mlp::{mlp_forward, MlpNetwork};
use crate::preprocess::{denormalize_value, invert_returns, NormalizationParams};
use crate::training::{StopReason, TrainingReport};

/// Clamp margin for raw model outputs before inversion.
pub const OUTPUT_CLAMP: f64 = 1e-9;

/// Test-set scores for one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Mean squared error in normalized space.
    pub mse: f64,
    /// √mse.
    pub rmse: f64,
    /// Mean absolute error in normalized space.
    pub mae: f64,
    /// Fraction of forecasts whose denormalized return carries the same
    /// sign as the actual return (zero matches only zero).
    pub directional_accuracy: f64,
}

/// Three-way sign. Deliberately not `f64::signum`, which maps +0.0 to 1.0
/// and would count a flat forecast as a rise.
fn sign3(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Scores normalized forecasts against normalized actuals.
pub fn evaluate_forecasts(
    predicted: &[f64],
    actual: &[f64],
    params: &NormalizationParams,
) -> Result<Metrics> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!(
            "{} forecasts against {} actuals",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Shape("nothing to score".into()));
    }
    let n = predicted.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut hits = 0usize;
    for (&p, &a) in predicted.iter().zip(actual) {
        let d = p - a;
        sq += d * d;
        abs += d.abs();
        let rp = denormalize_value(p, params)?;
        let ra = denormalize_value(a, params)?;
        if sign3(rp) == sign3(ra) {
            hits += 1;
        }
    }
    let mse = sq / n;
    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        mae: abs / n,
        directional_accuracy: hits as f64 / n,
    })
}

impl Metrics {
    pub fn csv_header() -> &'static str {
        "mse,rmse,mae,directional_accuracy"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            self.mse, self.rmse, self.mae, self.directional_accuracy
        )
    }
}

/// Either network, borrowed for a single forward pass.
#[derive(Debug, Clone, Copy)]
pub enum ForecastModel<'a> {
    Feedforward(&'a MlpNetwork),
    /// The hidden state is read, not advanced; callers stepping through a
    /// sequence thread their own state with `elman_step`.
    Recurrent(&'a ElmanNetwork, &'a HiddenState),
}

/// One-step-ahead forecast with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    /// Next-day rate.
    pub rate: f64,
    /// Raw model output before clamping into (0, 1).
    pub raw_output: f64,
    /// Whether the raw output had to be clamped — a saturation sign worth
    /// surfacing rather than hiding.
    pub clamped: bool,
}

/// Runs the model on one window of normalized values and reconstructs the
/// next rate: clamp into `[ε, 1−ε]`, denormalize to a return, invert the
/// return against the last known rate.
pub fn one_step_forecast(
    model: ForecastModel<'_>,
    window: &[f64],
    params: &NormalizationParams,
    last_rate: f64,
) -> Result<Forecast> {
    if !(last_rate > 0.0 && last_rate.is_finite()) {
        return Err(Error::Domain(format!(
            "last rate must be finite and > 0, got {last_rate}"
        )));
    }
    if window.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Domain(
            "window values must lie strictly inside (0, 1)".into(),
        ));
    }
    let raw = match model {
        ForecastModel::Feedforward(net) => {
            let sizes = net.layer_sizes();
            if sizes[2] != 1 {
                return Err(Error::Shape(format!(
                    "forecasting needs a scalar output, network has {}",
                    sizes[2]
                )));
            }
            let (y, _) = mlp_forward(net, window)?;
            y[0]
        }
        ForecastModel::Recurrent(net, state) => {
            let (y, _) = elman_step(net, state, window)?;
            y
        }
    };
    let squashed = raw.clamp(OUTPUT_CLAMP, 1.0 - OUTPUT_CLAMP);
    let predicted_return = denormalize_value(squashed, params)?;
    let rate = invert_returns(last_rate, predicted_return, params.mode)?;
    Ok(Forecast {
        rate,
        raw_output: raw,
        clamped: squashed != raw,
    })
}

/// One trained model's full record, as fed to [`compare_models`].
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub name: String,
    pub report: TrainingReport,
    pub metrics: Metrics,
}

/// Side-by-side view of one model in the comparison.
#[derive(Debug, Clone)]
pub struct ComparisonEntry {
    pub name: String,
    pub metrics: Metrics,
    /// Epochs needed to reach the target; `None` when the run stopped for
    /// any other reason.
    pub epochs_to_target: Option<usize>,
    pub stop_reason: StopReason,
}

/// Ratios for an ordered pair of runs (second relative to first). A value
/// below 1 favors the second run.
#[derive(Debug, Clone)]
pub struct PairRatios {
    pub first: String,
    pub second: String,
    /// epochs(second) / epochs(first); `None` unless both reached target.
    pub epoch_ratio: Option<f64>,
    /// test-mse(second) / test-mse(first); `None` unless both reached
    /// target — a diverged run's test score is not a denominator.
    pub mse_ratio: Option<f64>,
}

/// Cross-model comparison: per-model scores plus all pairwise ratios.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
    pub pairs: Vec<PairRatios>,
}

/// Tabulates ≥ 2 training runs. Ratios are listed for every ordered pair
/// (i, j) with i < j; entries that never reached the target keep their
/// metrics but are excluded from ratios and flagged in the rendering.
pub fn compare_models(runs: &[ModelRun]) -> Result<ComparisonReport> {
    if runs.len() < 2 {
        return Err(Error::Domain(format!(
            "comparison needs at least two runs, got {}",
            runs.len()
        )));
    }
    let entries: Vec<ComparisonEntry> = runs
        .iter()
        .map(|r| ComparisonEntry {
            name: r.name.clone(),
            metrics: r.metrics,
            epochs_to_target: r.report.epochs_to_target(),
            stop_reason: r.report.stop_reason,
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..entries.len() {
        for j in (i + 1)..entries.len() {
            let (a, b) = (&entries[i], &entries[j]);
            let both = a.epochs_to_target.zip(b.epochs_to_target);
            pairs.push(PairRatios {
                first: a.name.clone(),
                second: b.name.clone(),
                epoch_ratio: both.map(|(ea, eb)| eb as f64 / ea as f64),
                mse_ratio: both.map(|_| b.metrics.mse / a.metrics.mse),
            });
        }
    }
    Ok(ComparisonReport { entries, pairs })
}

impl ComparisonReport {
    /// Plain-text table for terminals and logs.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("model            test mse      rmse          mae           dir.acc  epochs\n");
        for e in &self.entries {
            let epochs = match e.epochs_to_target {
                Some(n) => format!("{n}"),
                None => format!("— ({})", e.stop_reason),
            };
            out.push_str(&format!(
                "{:<16} {:<13.6e} {:<13.6e} {:<13.6e} {:<8.4} {}\n",
                e.name, e.metrics.mse, e.metrics.rmse, e.metrics.mae,
                e.metrics.directional_accuracy, epochs
            ));
        }
        out.push('\n');
        for p in &self.pairs {
            match (p.epoch_ratio, p.mse_ratio) {
                (Some(er), Some(mr)) => out.push_str(&format!(
                    "{} vs {}: epoch ratio {:.4}, test-mse ratio {:.4}\n",
                    p.second, p.first, er, mr
                )),
                _ => out.push_str(&format!(
                    "{} vs {}: not comparable (a run missed the target)\n",
                    p.second, p.first
                )),
            }
        }
        out
    }

    /// Flat CSV: one `entry` row per model, one `pair` row per ratio.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "kind,name,vs,mse,rmse,mae,directional_accuracy,epochs_to_target,stop_reason,epoch_ratio,mse_ratio\n",
        );
        for e in &self.entries {
            let epochs = e
                .epochs_to_target
                .map(|n| n.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "entry,{},,{:.16e},{:.16e},{:.16e},{:.16e},{},{},,\n",
                e.name,
                e.metrics.mse,
                e.metrics.rmse,
                e.metrics.mae,
                e.metrics.directional_accuracy,
                epochs,
                e.stop_reason
            ));
        }
        for p in &self.pairs {
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
            out.push_str(&format!(
                "pair,{},{},,,,,,,{},{}\n",
                p.second,
                p.first,
                fmt(p.epoch_ratio),
                fmt(p.mse_ratio)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::preprocess::{fit_normalizer, log_returns, normalize, ReturnMode};
    use crate::data::load_rate_series;

    fn params(mean: f64, std: f64) -> NormalizationParams {
        NormalizationParams {
            mean,
            std,
            mode: ReturnMode::LogDiff,
        }
    }

    /// Network of the given width that ignores its input and always emits
    /// `value`.
    fn constant_mlp(n_in: usize, value: f64) -> MlpNetwork {
        MlpNetwork::from_parts(
            Matrix::zeros(2, n_in),
            vec![0.0; 2],
            Matrix::zeros(1, 2),
            vec![value],
        )
        .unwrap()
    }

    #[test]
    fn perfect_forecast_scores_perfectly() {
        let p = params(0.0, 1.0);
        let values = [0.2, 0.5, 0.8, 0.4];
        let m = evaluate_forecasts(&values, &values, &p).unwrap();
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.directional_accuracy, 1.0);
    }

    #[test]
    fn all_opposite_signs_score_zero_accuracy() {
        // Normalization is decreasing: v < 0.5 ⇒ positive return.
        let p = params(0.0, 1.0);
        let predicted = [0.3, 0.2, 0.4];
        let actual = [0.7, 0.8, 0.6];
        let m = evaluate_forecasts(&predicted, &actual, &p).unwrap();
        assert_eq!(m.directional_accuracy, 0.0);
    }

    #[test]
    fn two_of_three_correct_signs() {
        let p = params(0.0, 1.0);
        let predicted = [0.3, 0.3, 0.3];
        let actual = [0.4, 0.2, 0.7];
        let m = evaluate_forecasts(&predicted, &actual, &p).unwrap();
        assert!((m.directional_accuracy - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn flat_forecast_matches_only_flat_actual() {
        // v = 0.5 with zero mean denormalizes to exactly 0.
        let p = params(0.0, 1.0);
        let m = evaluate_forecasts(&[0.5, 0.5], &[0.5, 0.3], &p).unwrap();
        assert_eq!(m.directional_accuracy, 0.5);
    }

    #[test]
    fn rmse_squares_back_to_mse() {
        let p = params(0.001, 0.02);
        let predicted = [0.31, 0.62, 0.45, 0.58, 0.29];
        let actual = [0.35, 0.55, 0.50, 0.52, 0.33];
        let m = evaluate_forecasts(&predicted, &actual, &p).unwrap();
        assert!((m.rmse * m.rmse - m.mse).abs() <= 1e-12 * m.mse);
        assert!(m.mse > 0.0 && m.mae > 0.0);
    }

    #[test]
    fn scoring_rejects_bad_shapes_and_values() {
        let p = params(0.0, 1.0);
        assert!(evaluate_forecasts(&[0.5], &[0.5, 0.5], &p).is_err());
        assert!(evaluate_forecasts(&[], &[], &p).is_err());
        assert!(evaluate_forecasts(&[1.5], &[0.5], &p).is_err());
        assert!(evaluate_forecasts(&[0.5], &[-0.1], &p).is_err());
    }

    #[test]
    fn zero_return_forecast_reproduces_last_rate() {
        let p = params(0.0, 0.01);
        let net = constant_mlp(4, 0.5);
        let window = [0.4, 0.5, 0.6, 0.5];
        let f = one_step_forecast(ForecastModel::Feedforward(&net), &window, &p, 4.2).unwrap();
        assert_eq!(f.rate, 4.2);
        assert!(!f.clamped);
        assert_eq!(f.raw_output, 0.5);
    }

    #[test]
    fn oracle_output_recovers_true_next_rate() {
        // Walk a real series through the full pipeline; a "model" that
        // emits the exact normalized next value must reproduce the rate.
        let csv = "date,rate\n\
                   2005-01-03,4.0000\n2005-01-04,4.0310\n2005-01-05,4.0125\n\
                   2005-01-06,4.0441\n2005-01-07,4.0298\n2005-01-10,4.0672\n";
        let series = load_rate_series(csv.as_bytes(), "test").unwrap();
        let returns = log_returns(&series, ReturnMode::LogDiff).unwrap();
        let p = fit_normalizer(&returns).unwrap();
        let normalized = normalize(&returns, &p).unwrap();
        let window = 2usize;
        let values = normalized.values();
        for i in 0..values.len() - window {
            let truth = values[i + window];
            let net = constant_mlp(window, truth);
            let last_rate = series.rates()[i + window];
            let f = one_step_forecast(
                ForecastModel::Feedforward(&net),
                &values[i..i + window],
                &p,
                last_rate,
            )
            .unwrap();
            let actual_next = series.rates()[i + window + 1];
            assert!(
                (f.rate - actual_next).abs() <= 1e-9 * actual_next,
                "step {i}: reconstructed {} vs actual {actual_next}",
                f.rate
            );
        }
    }

    #[test]
    fn out_of_range_output_is_clamped_and_flagged() {
        let p = params(0.0, 0.01);
        for raw in [1.2, -0.2] {
            let net = constant_mlp(3, raw);
            let window = [0.5, 0.5, 0.5];
            let f =
                one_step_forecast(ForecastModel::Feedforward(&net), &window, &p, 4.0).unwrap();
            assert!(f.clamped, "raw {raw} not flagged");
            assert_eq!(f.raw_output, raw);
            assert!(f.rate.is_finite() && f.rate > 0.0);
        }
    }

    #[test]
    fn recurrent_forecast_agrees_with_direct_step() {
        let net = ElmanNetwork::init(3, 4, 5, 0.4).unwrap();
        let state = HiddenState::zero(4);
        let p = params(0.0005, 0.012);
        let window = [0.45, 0.52, 0.48];
        let f = one_step_forecast(
            ForecastModel::Recurrent(&net, &state),
            &window,
            &p,
            3.9,
        )
        .unwrap();
        let (y, _) = elman_step(&net, &state, &window).unwrap();
        assert_eq!(f.raw_output, y);
        // Same rate as pushing y through the inverse by hand.
        let r = denormalize_value(y.clamp(OUTPUT_CLAMP, 1.0 - OUTPUT_CLAMP), &p).unwrap();
        assert_eq!(f.rate, invert_returns(3.9, r, ReturnMode::LogDiff).unwrap());
    }

    #[test]
    fn forecast_rejects_bad_inputs() {
        let p = params(0.0, 0.01);
        let net = constant_mlp(3, 0.5);
        let m = ForecastModel::Feedforward(&net);
        assert!(one_step_forecast(m, &[0.5, 0.5], &p, 4.0).is_err());
        assert!(one_step_forecast(m, &[0.5, 0.5, 1.5], &p, 4.0).is_err());
        assert!(one_step_forecast(m, &[0.5, 0.5, 0.5], &p, 0.0).is_err());
        assert!(one_step_forecast(m, &[0.5, 0.5, 0.5], &p, -2.0).is_err());
    }

    fn run(name: &str, reason: StopReason, epochs: usize, mse: f64) -> ModelRun {
        ModelRun {
            name: name.into(),
            report: TrainingReport {
                epochs_run: epochs,
                error_curve: vec![0.0; epochs],
                stop_reason: reason,
                wall_time: 0.0,
            },
            metrics: Metrics {
                mse,
                rmse: mse.sqrt(),
                mae: mse,
                directional_accuracy: 0.5,
            },
        }
    }

    #[test]
    fn comparison_reports_ratios_for_converged_pairs() {
        let a = run("backprop", StopReason::TargetReached, 100, 2e-4);
        let b = run("rprop+", StopReason::TargetReached, 75, 1e-4);
        let report = compare_models(&[a, b]).unwrap();
        assert_eq!(report.pairs.len(), 1);
        let pair = &report.pairs[0];
        assert!((pair.epoch_ratio.unwrap() - 0.75).abs() < 1e-15);
        assert!((pair.mse_ratio.unwrap() - 0.5).abs() < 1e-15);
        let text = report.render_text();
        assert!(text.contains("backprop") && text.contains("rprop+"));
        assert!(text.contains("0.7500"));
    }

    #[test]
    fn identical_runs_compare_at_unity() {
        let a = run("x", StopReason::TargetReached, 50, 1e-4);
        let report = compare_models(&[a.clone(), a]).unwrap();
        assert_eq!(report.pairs[0].epoch_ratio, Some(1.0));
        assert_eq!(report.pairs[0].mse_ratio, Some(1.0));
    }

    #[test]
    fn unconverged_runs_are_flagged_not_ratioed() {
        let a = run("good", StopReason::TargetReached, 50, 1e-4);
        let b = run("bad", StopReason::Diverged, 7, 3.0);
        let report = compare_models(&[a, b]).unwrap();
        assert_eq!(report.pairs[0].epoch_ratio, None);
        assert_eq!(report.pairs[0].mse_ratio, None);
        assert!(report.render_text().contains("not comparable"));
        assert!(report.entries[1].epochs_to_target.is_none());
    }

    #[test]
    fn comparison_needs_at_least_two_runs() {
        let a = run("solo", StopReason::TargetReached, 10, 1e-4);
        assert!(compare_models(&[a]).is_err());
        assert!(compare_models(&[]).is_err());
    }

    #[test]
    fn comparison_csv_has_one_row_per_entry_and_pair() {
        let a = run("a", StopReason::TargetReached, 10, 1e-4);
        let b = run("b", StopReason::TargetReached, 20, 2e-4);
        let c = run("c", StopReason::MaxEpochs, 30, 3e-4);
        let report = compare_models(&[a, b, c]).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + 3 + 3, "{csv}");
        assert!(lines[1].starts_with("entry,a,"));
        assert!(lines.iter().any(|l| l.starts_with("pair,b,a,")));
    }
}
