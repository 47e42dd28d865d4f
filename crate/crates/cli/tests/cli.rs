//! End-to-end tests of the `ratecast` binary: exit codes, artifact
//! contents, and rerun determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ratecast_cli::checkpoint::{load_checkpoint, SavedModel};

fn ratecast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratecast"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code}\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("temp paths are utf-8")
}

/// Writes a small synthetic series and returns its path.
fn synth_series(dir: &Path, kind: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("{kind}-{n}-{seed}.csv"));
    let out = ratecast(&[
        "synth",
        "--kind",
        kind,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path_str(&path),
    ]);
    assert_exit(&out, 0);
    path
}

fn csv_data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn synth_writes_a_loadable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth_series(dir.path(), "gbm-walk", 50, 7);
    let file = std::fs::File::open(&path).unwrap();
    let series = ratecast::data::load_rate_series(file, "t").unwrap();
    assert_eq!(series.len(), 50);
    assert!(series.rates().iter().all(|r| *r > 0.0));
}

#[test]
fn usage_errors_exit_2() {
    let out = ratecast(&["synth", "--bogus-flag"]);
    assert_exit(&out, 2);

    let out = ratecast(&["transmogrify"]);
    assert_exit(&out, 2);

    // Too short to generate.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let out = ratecast(&["synth", "--kind", "gbm-walk", "--n", "1", "--out", path_str(&path)]);
    assert_exit(&out, 2);
    assert!(!path.exists(), "usage error must not leave outputs");

    // Foreign series parameter.
    let out = ratecast(&[
        "synth", "--kind", "gbm-walk", "--n", "10", "--period", "5", "--out", path_str(&path),
    ]);
    assert_exit(&out, 2);

    // Bad split.
    let ck = dir.path().join("none.ckpt");
    let out = ratecast(&[
        "evaluate", "--checkpoint", path_str(&ck), "--data", path_str(&path), "--split", "1.5",
    ]);
    assert_exit(&out, 2);
}

#[test]
fn missing_data_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = ratecast(&[
        "train",
        "--data",
        "/nonexistent/rates.csv",
        "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&out, 3);
}

#[test]
fn invalid_model_trainer_combo_exits_2_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = ratecast(&[
        "train",
        "--synthetic",
        "gbm-walk",
        "--model",
        "ff",
        "--trainer",
        "ekf",
        "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&out, 2);
    assert!(!out_dir.exists(), "usage error must not create the output dir");
}

#[test]
fn train_ff_writes_checkpoint_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "noisy-sine", 120, 3);
    let out_dir = dir.path().join("run");
    let out = ratecast(&[
        "train",
        "--data",
        path_str(&data),
        "--window",
        "5",
        "--hidden",
        "6",
        "--epochs",
        "40",
        "--target-mse",
        "1e-12",
        "--seed",
        "11",
        "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&out, 0);

    let ck = load_checkpoint(&out_dir.join("checkpoint.txt")).unwrap();
    assert!(matches!(ck.model, SavedModel::Feedforward(_)));
    assert_eq!(ck.model.layer_sizes(), [5, 6, 1]);
    assert_eq!(ck.seed, 11);

    // Unreachable target: the curve has exactly the epoch budget of rows.
    assert_eq!(csv_data_rows(&out_dir.join("error-curve.csv")), 40);
}

#[test]
fn train_elman_writes_checkpoint_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "noisy-sine", 120, 5);
    let out_dir = dir.path().join("run");
    let out = ratecast(&[
        "train",
        "--data",
        path_str(&data),
        "--model",
        "elman",
        "--window",
        "5",
        "--hidden",
        "4",
        "--streams",
        "3",
        "--stream-length",
        "40",
        "--epochs",
        "3",
        "--target-mse",
        "1e-12",
        "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&out, 0);

    let ck = load_checkpoint(&out_dir.join("checkpoint.txt")).unwrap();
    assert!(matches!(ck.model, SavedModel::Elman(_)));
    assert_eq!(ck.model.layer_sizes(), [5, 4, 1]);
    assert_eq!(csv_data_rows(&out_dir.join("error-curve.csv")), 3);
}

#[test]
fn identical_invocations_produce_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "gbm-walk", 140, 9);
    let mut dirs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = ratecast(&[
            "train",
            "--data",
            path_str(&data),
            "--window",
            "6",
            "--hidden",
            "5",
            "--epochs",
            "25",
            "--seed",
            "4",
            "--out",
            path_str(&out_dir),
        ]);
        assert_exit(&out, 0);
        dirs.push(out_dir);
    }
    for file in ["checkpoint.txt", "error-curve.csv"] {
        let a = std::fs::read(dirs[0].join(file)).unwrap();
        let b = std::fs::read(dirs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn evaluate_and_forecast_consume_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "noisy-sine", 120, 3);
    let run = dir.path().join("run");
    let out = ratecast(&[
        "train", "--data", path_str(&data), "--window", "5", "--hidden", "6", "--epochs", "60",
        "--out", path_str(&run),
    ]);
    assert_exit(&out, 0);
    let ck = run.join("checkpoint.txt");

    let eval_dir = dir.path().join("eval");
    let out = ratecast(&[
        "evaluate",
        "--checkpoint",
        path_str(&ck),
        "--data",
        path_str(&data),
        "--out",
        path_str(&eval_dir),
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("mse="), "no metrics in: {text}");

    // 120 rates -> 119 returns -> 114 rows -> 91 train, 23 test.
    assert_eq!(csv_data_rows(&eval_dir.join("forecast-vs-actual.csv")), 23);
    assert_eq!(csv_data_rows(&eval_dir.join("metrics.csv")), 1);

    let out = ratecast(&["forecast", "--checkpoint", path_str(&ck), "--data", path_str(&data)]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    let rate: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("forecast: "))
        .expect("forecast line present")
        .trim()
        .parse()
        .expect("forecast parses as a float");
    assert!(rate.is_finite() && rate > 0.0, "bad forecast {rate}");
}

#[test]
fn preprocess_writes_normalized_values_inside_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "gbm-walk", 80, 2);
    let out_dir = dir.path().join("pre");
    let out = ratecast(&[
        "preprocess", "--data", path_str(&data), "--out", path_str(&out_dir),
    ]);
    assert_exit(&out, 0);

    assert_eq!(csv_data_rows(&out_dir.join("raw-series.csv")), 80);
    let normalized = std::fs::read_to_string(out_dir.join("normalized-series.csv")).unwrap();
    let mut rows = 0;
    for line in normalized.lines().skip(1) {
        let (_, value) = line.split_once(',').unwrap();
        let v: f64 = value.parse().unwrap();
        assert!(v > 0.0 && v < 1.0, "normalized value {v} outside (0,1)");
        rows += 1;
    }
    assert_eq!(rows, 79);
}

#[test]
fn corrupt_checkpoint_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "gbm-walk", 60, 1);
    let ck = dir.path().join("bad.ckpt");
    std::fs::write(&ck, "not a checkpoint at all\n").unwrap();
    let out = ratecast(&[
        "evaluate", "--checkpoint", path_str(&ck), "--data", path_str(&data),
        "--out", path_str(&dir.path().join("eval")),
    ]);
    assert_exit(&out, 3);
}

#[test]
fn divergent_training_exits_4_with_curve_but_no_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "noisy-sine", 100, 8);
    let out_dir = dir.path().join("run");
    // Full-batch gradient descent at a preposterous rate blows up fast.
    let out = ratecast(&[
        "train",
        "--data",
        path_str(&data),
        "--window",
        "5",
        "--hidden",
        "6",
        "--trainer",
        "backprop",
        "--rate",
        "1e6",
        "--epochs",
        "50",
        "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&out, 4);
    assert!(out_dir.join("error-curve.csv").exists(), "curve is the diagnostic");
    assert!(!out_dir.join("checkpoint.txt").exists(), "no checkpoint from a diverged run");
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_out = dir.path().join("cfg-out");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            r#"
[data]
synthetic = "noisy-sine"
n = 120
seed = 3
window = 5

[model]
hidden = 6

[trainer]
epochs = 30
target-mse = 1e-12

[output]
dir = "{}"
"#,
            cfg_out.display()
        ),
    )
    .unwrap();

    let out = ratecast(&["train", "--config", path_str(&cfg)]);
    assert_exit(&out, 0);
    assert_eq!(csv_data_rows(&cfg_out.join("error-curve.csv")), 30);
    let ck = load_checkpoint(&cfg_out.join("checkpoint.txt")).unwrap();
    assert_eq!(ck.model.layer_sizes(), [5, 6, 1]);

    // A flag trims the epoch budget without touching the file.
    let override_dir = dir.path().join("override-out");
    let out = ratecast(&[
        "train", "--config", path_str(&cfg), "--epochs", "7", "--out", path_str(&override_dir),
    ]);
    assert_exit(&out, 0);
    assert_eq!(csv_data_rows(&override_dir.join("error-curve.csv")), 7);
}

#[test]
fn out_dir_env_var_is_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_series(dir.path(), "gbm-walk", 60, 4);
    let env_out = dir.path().join("env-out");
    let out = Command::new(env!("CARGO_BIN_EXE_ratecast"))
        .args([
            "train", "--data", path_str(&data), "--window", "5", "--hidden", "4", "--epochs", "5",
        ])
        .env("RATECAST_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert_exit(&out, 0);
    assert!(env_out.join("checkpoint.txt").exists());
}

#[test]
fn compare_runs_all_four_trainers() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("cmp");
    let out = ratecast(&[
        "compare",
        "--synthetic",
        "noisy-sine",
        "--n",
        "150",
        "--data-seed",
        "6",
        "--window",
        "5",
        "--epochs-ff",
        "30",
        "--epochs-ekf",
        "2",
        "--streams",
        "3",
        "--stream-length",
        "40",
        "--out",
        path_str(&out_dir),
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    for name in ["ff+backprop", "ff+rprop+", "ff+irprop+", "elman+ekf"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
    // 4 entries + C(4,2) pair rows + header.
    let comparison = std::fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().count(), 1 + 4 + 6);
    for slug in ["ff-backprop", "ff-rprop-plus", "ff-irprop-plus", "elman-ekf"] {
        assert!(out_dir.join(format!("error-curve-{slug}.csv")).exists());
    }
}
