//! `compare`: the headline experiment. Trains ff+backprop, ff+rprop+,
//! ff+irprop+, and elman+ekf on the same series, scores each on the same
//! test rows, and emits a comparison report plus per-run error curves.

use ratecast::ekf::{train_elman_multistream, EkfState};
use ratecast::elman::ElmanNetwork;
use ratecast::evaluate::{compare_models, evaluate_forecasts, Metrics, ModelRun};
use ratecast::mlp::MlpNetwork;
use ratecast::preprocess::{split_index, split_train_test};
use ratecast::training::{
    train_feedforward, FeedforwardAlgorithm, StopCriteria, StopReason, TrainingReport,
};

use crate::args::CompareArgs;
use crate::checkpoint::SavedModel;
use crate::config::{CompareSettings, DEFAULT_INIT_SCALE_ELMAN, DEFAULT_INIT_SCALE_FF};
use crate::error::{CliError, CliResult};
use crate::pipeline::{clamp_predictions, load_source, predict_all, Prepared};
use crate::plots::{emit_plot_csv, PlotData};

pub fn run(args: &CompareArgs) -> CliResult<()> {
    let settings = CompareSettings::resolve(args)?;
    let series = load_source(&settings.source)?;
    let prepared = Prepared::fit(series, settings.mode, settings.window)?;
    let split_row = split_index(prepared.set.len(), settings.split)?;
    let test_rows = split_row..prepared.set.len();
    let (train_set, _) = split_train_test(&prepared.set, settings.split)?;

    std::fs::create_dir_all(&settings.out_dir)?;
    println!(
        "comparing on {}: {} train rows, {} test rows, window {}",
        prepared.series.label(),
        train_set.len(),
        test_rows.len(),
        settings.window,
    );

    let mut runs: Vec<ModelRun> = Vec::with_capacity(4);

    let ff_algorithms = [
        ("ff+backprop", "ff-backprop", FeedforwardAlgorithm::Backprop { rate: settings.rate }),
        ("ff+rprop+", "ff-rprop-plus", FeedforwardAlgorithm::RpropPlus),
        ("ff+irprop+", "ff-irprop-plus", FeedforwardAlgorithm::IrpropPlus),
    ];
    let stop = StopCriteria {
        target_mse: settings.target_mse,
        max_epochs: settings.epochs_ff,
    };
    for (name, slug, algorithm) in ff_algorithms {
        let net = MlpNetwork::init(
            [settings.window, 40, 1],
            settings.seed,
            DEFAULT_INIT_SCALE_FF,
        )?;
        let (trained, report) = train_feedforward(net, &train_set, algorithm, &stop)?;
        let metrics = finish_run(
            name,
            slug,
            SavedModel::Feedforward(trained),
            &report,
            &prepared,
            test_rows.clone(),
            &settings,
        )?;
        runs.push(ModelRun {
            name: name.into(),
            report,
            metrics,
        });
    }

    {
        let name = "elman+ekf";
        let net = ElmanNetwork::init(
            settings.window,
            10,
            settings.seed,
            DEFAULT_INIT_SCALE_ELMAN,
        )?;
        let train_values = prepared.train_values(split_row)?;
        let config = settings
            .ekf
            .to_multistream(settings.seed, settings.epochs_ekf, settings.target_mse);
        let ekf = EkfState::new(
            net.weight_count(),
            settings.ekf.p0,
            settings.ekf.eta,
            settings.ekf.q,
        )?;
        let (trained, report) = train_elman_multistream(&net, &train_values, &config, ekf)?;
        let metrics = finish_run(
            name,
            "elman-ekf",
            SavedModel::Elman(trained),
            &report,
            &prepared,
            test_rows.clone(),
            &settings,
        )?;
        runs.push(ModelRun {
            name: name.into(),
            report,
            metrics,
        });
    }

    let report = compare_models(&runs)?;
    print!("{}", report.render_text());
    let csv_path = settings.out_dir.join("comparison.csv");
    std::fs::write(&csv_path, report.to_csv())?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

/// Writes the run's error curve, then scores it on the test rows. A
/// diverged run aborts the comparison — its curve is already on disk as
/// the diagnostic.
fn finish_run(
    name: &str,
    slug: &str,
    model: SavedModel,
    report: &TrainingReport,
    prepared: &Prepared,
    test_rows: std::ops::Range<usize>,
    settings: &CompareSettings,
) -> CliResult<Metrics> {
    let curve_path = settings.out_dir.join(format!("error-curve-{slug}.csv"));
    emit_plot_csv(&PlotData::ErrorCurve(&report.error_curve), &curve_path)?;
    if report.stop_reason == StopReason::Diverged {
        return Err(CliError::Numeric(format!(
            "{name} diverged after {} epochs (error curve at {})",
            report.epochs_run,
            curve_path.display()
        )));
    }

    let raw = predict_all(&model, &prepared.set)?;
    let raw_test = &raw[test_rows.clone()];
    let predicted = clamp_predictions(raw_test);
    let targets = &prepared.set.targets()[test_rows];
    let metrics = evaluate_forecasts(&predicted, targets, &prepared.params)?;

    println!(
        "{name}: stop={}, epochs={}, train-mse={}, test-mse={:.6e}, wall={:.2}s",
        report.stop_reason,
        report.epochs_run,
        report
            .final_error()
            .map(|e| format!("{e:.6e}"))
            .unwrap_or_else(|| "n/a".into()),
        metrics.mse,
        report.wall_time,
    );
    println!("wrote {}", curve_path.display());
    Ok(metrics)
}
