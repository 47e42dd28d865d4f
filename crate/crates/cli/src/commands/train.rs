//! `train`: fit a model on the training split and write the checkpoint
//! plus its error curve.
//!
//! On divergence the error curve is still written — it is the diagnostic —
//! but no checkpoint is, and the process exits with the numeric-failure
//! code.

use ratecast::ekf::{train_elman_multistream, EkfState};
use ratecast::elman::ElmanNetwork;
use ratecast::mlp::MlpNetwork;
use ratecast::preprocess::{split_index, split_train_test};
use ratecast::training::{train_feedforward, StopCriteria, StopReason, TrainingReport};

use crate::args::TrainArgs;
use crate::checkpoint::{save_checkpoint, Checkpoint, SavedModel};
use crate::config::{TrainSettings, TrainerKind};
use crate::error::{CliError, CliResult};
use crate::pipeline::{load_source, Prepared};
use crate::plots::{emit_plot_csv, PlotData};

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let settings = TrainSettings::resolve(args)?;
    let series = load_source(&settings.source)?;
    let prepared = Prepared::fit(series, settings.mode, settings.window)?;
    let split_row = split_index(prepared.set.len(), settings.split)?;

    // All validation that can fail is behind us; artifacts may now be
    // created.
    std::fs::create_dir_all(&settings.out_dir)?;

    let (model, report, train_count) = match settings.trainer {
        TrainerKind::Ekf => {
            let net = ElmanNetwork::init(
                settings.window,
                settings.hidden,
                settings.seed,
                settings.init_scale,
            )?;
            let train_values = prepared.train_values(split_row)?;
            let config = settings
                .ekf
                .to_multistream(settings.seed, settings.epochs, settings.target_mse);
            let ekf = EkfState::new(
                net.weight_count(),
                settings.ekf.p0,
                settings.ekf.eta,
                settings.ekf.q,
            )?;
            let n_values = train_values.values().len();
            let (trained, report) = train_elman_multistream(&net, &train_values, &config, ekf)?;
            (SavedModel::Elman(trained), report, n_values)
        }
        ff => {
            let algorithm = ff
                .algorithm(settings.rate)
                .expect("non-ekf trainers are feedforward algorithms");
            let net = MlpNetwork::init(
                [settings.window, settings.hidden, 1],
                settings.seed,
                settings.init_scale,
            )?;
            let (train_set, _) = split_train_test(&prepared.set, settings.split)?;
            let stop = StopCriteria {
                target_mse: settings.target_mse,
                max_epochs: settings.epochs,
            };
            let n_rows = train_set.len();
            let (trained, report) = train_feedforward(net, &train_set, algorithm, &stop)?;
            (SavedModel::Feedforward(trained), report, n_rows)
        }
    };

    let curve = PlotData::ErrorCurve(&report.error_curve);
    let curve_path = settings.out_dir.join(format!("{}.csv", curve.kind_name()));
    emit_plot_csv(&curve, &curve_path)?;

    if report.stop_reason == StopReason::Diverged {
        return Err(CliError::Numeric(format!(
            "training diverged after {} epochs (error curve at {})",
            report.epochs_run,
            curve_path.display()
        )));
    }

    let checkpoint_path = settings.out_dir.join("checkpoint.txt");
    save_checkpoint(
        &Checkpoint {
            model,
            params: prepared.params,
            seed: settings.seed,
            config_hash: settings.config_hash(),
        },
        &checkpoint_path,
    )?;

    print_summary(&settings, &report, train_count);
    println!("wrote {}", checkpoint_path.display());
    println!("wrote {}", curve_path.display());
    Ok(())
}

fn print_summary(settings: &TrainSettings, report: &TrainingReport, train_count: usize) {
    let unit = match settings.trainer {
        TrainerKind::Ekf => "train values",
        _ => "train rows",
    };
    let final_error = report
        .final_error()
        .map(|e| format!("{e:.16e}"))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "trained {} {}-{}-1 ({}): {} {}, stop={}, epochs={}, final-mse={}, wall={:.2}s",
        settings.model.name(),
        settings.window,
        settings.hidden,
        settings.trainer.name(),
        train_count,
        unit,
        report.stop_reason,
        report.epochs_run,
        final_error,
        report.wall_time,
    );
}
