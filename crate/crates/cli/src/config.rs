//! Run configuration: defaults, TOML config files, flag overrides, and
//! cross-field validation.
//!
//! Precedence is flags over file over built-in defaults, with one
//! exception: if any data-source flag (`--data`/`--synthetic`) is given,
//! the file's whole data-source group is ignored rather than merged
//! field-by-field, so a flag can never be silently combined with a
//! conflicting source from the file. The default output directory can be
//! overridden with the `RATECAST_OUT_DIR` environment variable.
//!
//! Every check here reports a usage error (exit 2) — these are invocation
//! problems, found before any file is read or written.

use std::path::{Path, PathBuf};

use ratecast::data::SyntheticKind;
use ratecast::ekf::{
    MultistreamConfig, DEFAULT_INITIAL_COVARIANCE, DEFAULT_LEARNING_RATE, DEFAULT_PROCESS_NOISE,
};
use ratecast::preprocess::ReturnMode;
use ratecast::training::FeedforwardAlgorithm;
use sha2::{Digest, Sha256};

use crate::args::{CompareArgs, TrainArgs};
use crate::error::{CliError, CliResult};

pub const OUT_DIR_ENV: &str = "RATECAST_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "ratecast-out";

pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_SPLIT: f64 = 0.8;
pub const DEFAULT_HIDDEN_FF: usize = 40;
pub const DEFAULT_HIDDEN_ELMAN: usize = 10;
pub const DEFAULT_EPOCHS_FF: usize = 1000;
pub const DEFAULT_EPOCHS_EKF: usize = 50;
pub const DEFAULT_TARGET_MSE: f64 = 1e-4;
pub const DEFAULT_RATE: f64 = 0.1;
pub const DEFAULT_INIT_SCALE_FF: f64 = 0.5;
pub const DEFAULT_INIT_SCALE_ELMAN: f64 = 0.3;
pub const DEFAULT_SYNTH_N: usize = 2100;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

// ---------------------------------------------------------------------------
// Config file schema

#[derive(Debug, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub data: DataSection,
    pub model: ModelSection,
    pub trainer: TrainerSection,
    pub ekf: EkfSection,
    pub output: OutputSection,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub synthetic: Option<String>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub window: Option<usize>,
    pub split: Option<f64>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelSection {
    pub kind: Option<String>,
    pub hidden: Option<usize>,
    pub init_scale: Option<f64>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrainerSection {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub target_mse: Option<f64>,
    pub rate: Option<f64>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EkfSection {
    pub streams: Option<usize>,
    pub stream_length: Option<usize>,
    pub tbptt_window: Option<usize>,
    pub p0: Option<f64>,
    pub eta: Option<f64>,
    pub q: Option<f64>,
    pub resample: Option<bool>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

pub fn load_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("config file {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Resolved settings

/// Where the rate series comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    File(PathBuf),
    Synthetic {
        kind: SyntheticKind,
        n: usize,
        seed: u64,
    },
}

impl DataSource {
    /// Stable identity string used in config hashing and diagnostics.
    pub fn describe(&self) -> String {
        match self {
            DataSource::File(p) => format!("file:{}", p.display()),
            DataSource::Synthetic { kind, n, seed } => {
                format!("synthetic:{}:{n}:{seed}", kind.name())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ff,
    Elman,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ff => "ff",
            ModelKind::Elman => "elman",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainerKind {
    Backprop,
    RpropPlus,
    IrpropPlus,
    Ekf,
}

impl TrainerKind {
    pub fn name(self) -> &'static str {
        match self {
            TrainerKind::Backprop => "backprop",
            TrainerKind::RpropPlus => "rprop+",
            TrainerKind::IrpropPlus => "irprop+",
            TrainerKind::Ekf => "ekf",
        }
    }

    /// The feedforward algorithm this trainer selects, if it is one.
    pub fn algorithm(self, rate: f64) -> Option<FeedforwardAlgorithm> {
        match self {
            TrainerKind::Backprop => Some(FeedforwardAlgorithm::Backprop { rate }),
            TrainerKind::RpropPlus => Some(FeedforwardAlgorithm::RpropPlus),
            TrainerKind::IrpropPlus => Some(FeedforwardAlgorithm::IrpropPlus),
            TrainerKind::Ekf => None,
        }
    }
}

/// Multistream Kalman knobs, resolved.
#[derive(Debug, Clone, Copy)]
pub struct EkfSettings {
    pub streams: usize,
    pub stream_length: usize,
    pub tbptt_window: usize,
    pub p0: f64,
    pub eta: f64,
    pub q: f64,
    pub resample: bool,
}

impl EkfSettings {
    fn resolve(flags: &EkfFlags, file: &EkfSection, window: usize) -> Self {
        let base = MultistreamConfig::default();
        EkfSettings {
            streams: pick(flags.streams, file.streams, base.n_streams),
            stream_length: pick(flags.stream_length, file.stream_length, base.stream_length),
            // Derivative depth defaults to the input window: the
            // truncation then spans exactly one window of context.
            tbptt_window: pick(flags.tbptt_window, file.tbptt_window, window),
            p0: pick(flags.p0, file.p0, DEFAULT_INITIAL_COVARIANCE),
            eta: pick(flags.eta, file.eta, DEFAULT_LEARNING_RATE),
            q: pick(flags.q, file.q, DEFAULT_PROCESS_NOISE),
            resample: pick(flags.resample, file.resample, base.resample_per_epoch),
        }
    }

    fn validate(&self, window: usize) -> CliResult<()> {
        if self.streams == 0 {
            return Err(usage("--streams must be at least 1"));
        }
        if self.stream_length <= window {
            return Err(usage(format!(
                "--stream-length {} must exceed the window {window} to yield a training step",
                self.stream_length
            )));
        }
        if self.tbptt_window == 0 {
            return Err(usage("--tbptt-window must be at least 1"));
        }
        for (name, v) in [("p0", self.p0), ("eta", self.eta), ("q", self.q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(usage(format!("--{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn to_multistream(&self, seed: u64, epochs: usize, target_mse: f64) -> MultistreamConfig {
        MultistreamConfig {
            n_streams: self.streams,
            stream_length: self.stream_length,
            tbptt_window: self.tbptt_window,
            seed,
            epochs,
            target_mse,
            resample_per_epoch: self.resample,
        }
    }

    fn canonical(&self) -> String {
        format!(
            "streams={};stream-length={};tbptt-window={};p0={:.16e};eta={:.16e};q={:.16e};resample={}",
            self.streams, self.stream_length, self.tbptt_window, self.p0, self.eta, self.q,
            self.resample
        )
    }
}

/// EKF flags shared by `train` and `compare`.
struct EkfFlags {
    streams: Option<usize>,
    stream_length: Option<usize>,
    tbptt_window: Option<usize>,
    p0: Option<f64>,
    eta: Option<f64>,
    q: Option<f64>,
    resample: Option<bool>,
}

impl From<&TrainArgs> for EkfFlags {
    fn from(a: &TrainArgs) -> Self {
        EkfFlags {
            streams: a.streams,
            stream_length: a.stream_length,
            tbptt_window: a.tbptt_window,
            p0: a.p0,
            eta: a.eta,
            q: a.q,
            resample: a.resample,
        }
    }
}

impl From<&CompareArgs> for EkfFlags {
    fn from(a: &CompareArgs) -> Self {
        EkfFlags {
            streams: a.streams,
            stream_length: a.stream_length,
            tbptt_window: a.tbptt_window,
            p0: a.p0,
            eta: a.eta,
            q: a.q,
            resample: a.resample,
        }
    }
}

/// A fully resolved `train` invocation.
#[derive(Debug, Clone)]
pub struct TrainSettings {
    pub source: DataSource,
    pub mode: ReturnMode,
    pub window: usize,
    pub split: f64,
    pub model: ModelKind,
    pub hidden: usize,
    pub trainer: TrainerKind,
    pub rate: f64,
    pub seed: u64,
    pub init_scale: f64,
    pub epochs: usize,
    pub target_mse: f64,
    pub ekf: EkfSettings,
    pub out_dir: PathBuf,
}

/// A fully resolved `compare` invocation.
#[derive(Debug, Clone)]
pub struct CompareSettings {
    pub source: DataSource,
    pub mode: ReturnMode,
    pub window: usize,
    pub split: f64,
    pub seed: u64,
    pub epochs_ff: usize,
    pub epochs_ekf: usize,
    pub target_mse: f64,
    pub rate: f64,
    pub ekf: EkfSettings,
    pub out_dir: PathBuf,
}

pub fn parse_mode(text: Option<&str>) -> CliResult<ReturnMode> {
    match text {
        None => Ok(ReturnMode::LogDiff),
        Some(s) => s.parse().map_err(|e: ratecast::Error| usage(e.to_string())),
    }
}

fn parse_model(text: &str) -> CliResult<ModelKind> {
    match text {
        "ff" => Ok(ModelKind::Ff),
        "elman" => Ok(ModelKind::Elman),
        other => Err(usage(format!(
            "unknown model {other:?}, expected `ff` or `elman`"
        ))),
    }
}

fn parse_trainer(text: &str) -> CliResult<TrainerKind> {
    match text {
        "backprop" => Ok(TrainerKind::Backprop),
        "rprop+" => Ok(TrainerKind::RpropPlus),
        "irprop+" => Ok(TrainerKind::IrpropPlus),
        "ekf" => Ok(TrainerKind::Ekf),
        other => Err(usage(format!(
            "unknown trainer {other:?}, expected `backprop`, `rprop+`, `irprop+`, or `ekf`"
        ))),
    }
}

pub fn parse_synthetic_kind(name: &str) -> CliResult<SyntheticKind> {
    match name {
        "gbm-walk" => Ok(SyntheticKind::default_gbm()),
        "noisy-sine" => Ok(SyntheticKind::default_noisy_sine()),
        "nonlinear-ar" => Ok(SyntheticKind::default_nonlinear_ar()),
        other => Err(usage(format!(
            "unknown synthetic kind {other:?}, expected `gbm-walk`, `noisy-sine`, or `nonlinear-ar`"
        ))),
    }
}

/// Resolves the data source from one group of path/synthetic/n/seed values.
pub fn resolve_source(
    path: Option<PathBuf>,
    synthetic: Option<String>,
    n: Option<usize>,
    data_seed: Option<u64>,
) -> CliResult<DataSource> {
    match (path, synthetic) {
        (Some(_), Some(_)) => Err(usage("--data and --synthetic are mutually exclusive")),
        (None, None) => Err(usage("no input: pass --data FILE or --synthetic KIND")),
        (Some(p), None) => {
            if n.is_some() || data_seed.is_some() {
                return Err(usage("--n and --data-seed apply only to --synthetic"));
            }
            Ok(DataSource::File(p))
        }
        (None, Some(name)) => Ok(DataSource::Synthetic {
            kind: parse_synthetic_kind(&name)?,
            n: n.unwrap_or(DEFAULT_SYNTH_N),
            seed: data_seed.unwrap_or(0),
        }),
    }
}

/// Default output directory: `$RATECAST_OUT_DIR` if set, else `ratecast-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn validate_common(window: usize, split: f64, target_mse: f64) -> CliResult<()> {
    if window == 0 {
        return Err(usage("--window must be at least 1"));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(usage(format!(
            "--split must lie strictly in (0,1), got {split}"
        )));
    }
    if !(target_mse > 0.0 && target_mse.is_finite()) {
        return Err(usage(format!(
            "--target-mse must be finite and > 0, got {target_mse}"
        )));
    }
    Ok(())
}

impl TrainSettings {
    pub fn resolve(args: &TrainArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => load_file_config(path)?,
            None => FileConfig::default(),
        };

        // Flags replace the file's data-source group wholesale.
        let source = if args.data.is_some() || args.synthetic.is_some() {
            resolve_source(args.data.clone(), args.synthetic.clone(), args.n, args.data_seed)?
        } else {
            resolve_source(
                file.data.path.clone(),
                file.data.synthetic.clone(),
                args.n.or(file.data.n),
                args.data_seed.or(file.data.seed),
            )?
        };

        let mode = parse_mode(args.mode.as_deref().or(file.data.mode.as_deref()))?;
        let window = pick(args.window, file.data.window, DEFAULT_WINDOW);
        let split = pick(args.split, file.data.split, DEFAULT_SPLIT);

        let model = parse_model(&pick(
            args.model.clone(),
            file.model.kind.clone(),
            "ff".into(),
        ))?;
        let trainer = match args.trainer.clone().or(file.trainer.name.clone()) {
            Some(name) => parse_trainer(&name)?,
            None => match model {
                ModelKind::Ff => TrainerKind::IrpropPlus,
                ModelKind::Elman => TrainerKind::Ekf,
            },
        };
        match (model, trainer) {
            (ModelKind::Ff, TrainerKind::Ekf) => {
                return Err(usage(
                    "the ekf trainer drives the elman model; train ff with backprop, rprop+, or irprop+",
                ));
            }
            (ModelKind::Elman, t) if t != TrainerKind::Ekf => {
                return Err(usage(format!(
                    "the elman model trains with ekf, not {}",
                    t.name()
                )));
            }
            _ => {}
        }

        let (hidden_default, scale_default, epochs_default) = match model {
            ModelKind::Ff => (DEFAULT_HIDDEN_FF, DEFAULT_INIT_SCALE_FF, DEFAULT_EPOCHS_FF),
            ModelKind::Elman => (
                DEFAULT_HIDDEN_ELMAN,
                DEFAULT_INIT_SCALE_ELMAN,
                DEFAULT_EPOCHS_EKF,
            ),
        };

        let settings = TrainSettings {
            source,
            mode,
            window,
            split,
            model,
            hidden: pick(args.hidden, file.model.hidden, hidden_default),
            trainer,
            rate: pick(args.rate, file.trainer.rate, DEFAULT_RATE),
            seed: pick(args.seed, file.trainer.seed, 0),
            init_scale: pick(args.init_scale, file.model.init_scale, scale_default),
            epochs: pick(args.epochs, file.trainer.epochs, epochs_default),
            target_mse: pick(args.target_mse, file.trainer.target_mse, DEFAULT_TARGET_MSE),
            ekf: EkfSettings::resolve(&EkfFlags::from(args), &file.ekf, window),
            out_dir: resolve_out_dir(args.out.clone(), file.output.dir.clone()),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> CliResult<()> {
        validate_common(self.window, self.split, self.target_mse)?;
        if self.hidden == 0 {
            return Err(usage("--hidden must be at least 1"));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(usage(format!(
                "--init-scale must be finite and > 0, got {}",
                self.init_scale
            )));
        }
        if self.epochs == 0 {
            return Err(usage("--epochs must be at least 1"));
        }
        if self.trainer == TrainerKind::Backprop && !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(usage(format!(
                "--rate must be finite and > 0, got {}",
                self.rate
            )));
        }
        if self.trainer == TrainerKind::Ekf {
            self.ekf.validate(self.window)?;
        }
        Ok(())
    }

    /// Canonical text identity of this run. Excludes the output directory:
    /// the hash names the experiment, not where its artifacts land.
    pub fn canonical_string(&self) -> String {
        let mut s = format!(
            "source={}\nmode={}\nwindow={}\nsplit={:.16e}\nmodel={}\nhidden={}\ninit-scale={:.16e}\ntrainer={}\nseed={}\nepochs={}\ntarget-mse={:.16e}\n",
            self.source.describe(),
            self.mode,
            self.window,
            self.split,
            self.model.name(),
            self.hidden,
            self.init_scale,
            self.trainer.name(),
            self.seed,
            self.epochs,
            self.target_mse,
        );
        if self.trainer == TrainerKind::Backprop {
            s.push_str(&format!("rate={:.16e}\n", self.rate));
        }
        if self.trainer == TrainerKind::Ekf {
            s.push_str(&format!("ekf={}\n", self.ekf.canonical()));
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of the canonical identity.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

impl CompareSettings {
    pub fn resolve(args: &CompareArgs) -> CliResult<Self> {
        let source = resolve_source(
            args.data.clone(),
            args.synthetic.clone(),
            args.n,
            args.data_seed,
        )?;
        let window = args.window.unwrap_or(DEFAULT_WINDOW);
        let settings = CompareSettings {
            source,
            mode: parse_mode(args.mode.as_deref())?,
            window,
            split: args.split.unwrap_or(DEFAULT_SPLIT),
            seed: args.seed.unwrap_or(0),
            epochs_ff: args.epochs_ff.unwrap_or(DEFAULT_EPOCHS_FF),
            epochs_ekf: args.epochs_ekf.unwrap_or(DEFAULT_EPOCHS_EKF),
            target_mse: args.target_mse.unwrap_or(DEFAULT_TARGET_MSE),
            rate: args.rate.unwrap_or(DEFAULT_RATE),
            ekf: EkfSettings::resolve(&EkfFlags::from(args), &EkfSection::default(), window),
            out_dir: resolve_out_dir(args.out.clone(), None),
        };
        validate_common(settings.window, settings.split, settings.target_mse)?;
        if settings.epochs_ff == 0 || settings.epochs_ekf == 0 {
            return Err(usage("epoch budgets must be at least 1"));
        }
        if !(settings.rate > 0.0 && settings.rate.is_finite()) {
            return Err(usage(format!(
                "--rate must be finite and > 0, got {}",
                settings.rate
            )));
        }
        settings.ekf.validate(settings.window)?;
        Ok(settings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data_args() -> TrainArgs {
        TrainArgs {
            data: Some(PathBuf::from("rates.csv")),
            ..TrainArgs::default()
        }
    }

    #[test]
    fn defaults_resolve_to_the_reference_configuration() {
        let s = TrainSettings::resolve(&data_args()).unwrap();
        assert_eq!(s.window, 20);
        assert_eq!(s.split, 0.8);
        assert_eq!(s.mode, ReturnMode::LogDiff);
        assert_eq!(s.model, ModelKind::Ff);
        assert_eq!(s.hidden, 40);
        assert_eq!(s.trainer, TrainerKind::IrpropPlus);
        assert_eq!(s.epochs, DEFAULT_EPOCHS_FF);
        assert_eq!(s.target_mse, DEFAULT_TARGET_MSE);
    }

    #[test]
    fn elman_defaults_pick_the_kalman_trainer() {
        let args = TrainArgs {
            model: Some("elman".into()),
            ..data_args()
        };
        let s = TrainSettings::resolve(&args).unwrap();
        assert_eq!(s.trainer, TrainerKind::Ekf);
        assert_eq!(s.hidden, 10);
        assert_eq!(s.epochs, DEFAULT_EPOCHS_EKF);
        assert_eq!(s.ekf.streams, 20);
        assert_eq!(s.ekf.stream_length, 200);
        assert_eq!(s.ekf.tbptt_window, 20);
        assert!(s.ekf.resample);
    }

    #[test]
    fn tbptt_depth_follows_a_custom_window() {
        let args = TrainArgs {
            model: Some("elman".into()),
            window: Some(12),
            ..data_args()
        };
        let s = TrainSettings::resolve(&args).unwrap();
        assert_eq!(s.ekf.tbptt_window, 12);
    }

    #[test]
    fn model_trainer_cross_checks_are_usage_errors() {
        let ff_ekf = TrainArgs {
            trainer: Some("ekf".into()),
            ..data_args()
        };
        let err = TrainSettings::resolve(&ff_ekf).unwrap_err();
        assert_eq!(err.exit_code(), 2);

        let elman_rprop = TrainArgs {
            model: Some("elman".into()),
            trainer: Some("rprop+".into()),
            ..data_args()
        };
        assert_eq!(TrainSettings::resolve(&elman_rprop).unwrap_err().exit_code(), 2);

        let bad_model = TrainArgs {
            model: Some("transformer".into()),
            ..data_args()
        };
        assert_eq!(TrainSettings::resolve(&bad_model).unwrap_err().exit_code(), 2);

        let bad_trainer = TrainArgs {
            trainer: Some("adam".into()),
            ..data_args()
        };
        assert_eq!(TrainSettings::resolve(&bad_trainer).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn data_source_rules() {
        let both = TrainArgs {
            synthetic: Some("gbm-walk".into()),
            ..data_args()
        };
        assert_eq!(TrainSettings::resolve(&both).unwrap_err().exit_code(), 2);

        let neither = TrainArgs::default();
        assert_eq!(TrainSettings::resolve(&neither).unwrap_err().exit_code(), 2);

        let n_with_file = TrainArgs {
            n: Some(100),
            ..data_args()
        };
        assert_eq!(TrainSettings::resolve(&n_with_file).unwrap_err().exit_code(), 2);

        let synth = TrainArgs {
            synthetic: Some("nonlinear-ar".into()),
            ..TrainArgs::default()
        };
        let s = TrainSettings::resolve(&synth).unwrap();
        match s.source {
            DataSource::Synthetic { n, seed, .. } => {
                assert_eq!(n, DEFAULT_SYNTH_N);
                assert_eq!(seed, 0);
            }
            DataSource::File(_) => panic!("expected a synthetic source"),
        }
    }

    #[test]
    fn config_file_merges_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            r#"
[data]
path = "file-rates.csv"
window = 10
split = 0.7

[model]
kind = "ff"

[trainer]
name = "rprop+"
seed = 9

[output]
dir = "file-out"
"#,
        )
        .unwrap();

        // File alone.
        let args = TrainArgs {
            config: Some(path.clone()),
            ..TrainArgs::default()
        };
        let s = TrainSettings::resolve(&args).unwrap();
        assert_eq!(s.window, 10);
        assert_eq!(s.split, 0.7);
        assert_eq!(s.trainer, TrainerKind::RpropPlus);
        assert_eq!(s.seed, 9);
        assert_eq!(s.out_dir, PathBuf::from("file-out"));
        match &s.source {
            DataSource::File(p) => assert_eq!(p, &PathBuf::from("file-rates.csv")),
            other => panic!("expected file source, got {other:?}"),
        }

        // Flags override individual fields and the whole source group.
        let args = TrainArgs {
            config: Some(path),
            window: Some(15),
            synthetic: Some("gbm-walk".into()),
            ..TrainArgs::default()
        };
        let s = TrainSettings::resolve(&args).unwrap();
        assert_eq!(s.window, 15);
        assert_eq!(s.split, 0.7);
        assert!(matches!(s.source, DataSource::Synthetic { .. }));
    }

    #[test]
    fn unknown_config_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "[data]\npath = \"x.csv\"\nwnidow = 10\n").unwrap();
        let args = TrainArgs {
            config: Some(path),
            ..TrainArgs::default()
        };
        let err = TrainSettings::resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("wnidow"));
    }

    #[test]
    fn missing_config_file_is_a_usage_error() {
        let args = TrainArgs {
            config: Some(PathBuf::from("/nonexistent/run.toml")),
            data: Some(PathBuf::from("rates.csv")),
            ..TrainArgs::default()
        };
        assert_eq!(TrainSettings::resolve(&args).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn config_hash_tracks_the_experiment_not_the_output_dir() {
        let a = TrainSettings::resolve(&data_args()).unwrap();
        let b = TrainSettings::resolve(&data_args()).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 16);

        let moved = TrainArgs {
            out: Some(PathBuf::from("elsewhere")),
            ..data_args()
        };
        let c = TrainSettings::resolve(&moved).unwrap();
        assert_eq!(a.config_hash(), c.config_hash());

        let reseeded = TrainArgs {
            seed: Some(1),
            ..data_args()
        };
        let d = TrainSettings::resolve(&reseeded).unwrap();
        assert_ne!(a.config_hash(), d.config_hash());
    }

    #[test]
    fn ekf_stream_length_must_exceed_the_window() {
        let args = TrainArgs {
            model: Some("elman".into()),
            stream_length: Some(20),
            ..data_args()
        };
        let err = TrainSettings::resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("stream-length"));
    }

    #[test]
    fn out_dir_falls_back_to_the_environment() {
        // The only test that touches the variable, to keep parallel test
        // threads from racing on process-global state.
        std::env::set_var(OUT_DIR_ENV, "env-out");
        assert_eq!(resolve_out_dir(None, None), PathBuf::from("env-out"));
        assert_eq!(
            resolve_out_dir(Some(PathBuf::from("flag-out")), None),
            PathBuf::from("flag-out")
        );
        std::env::remove_var(OUT_DIR_ENV);
        assert_eq!(resolve_out_dir(None, None), PathBuf::from(DEFAULT_OUT_DIR));
    }

    #[test]
    fn compare_settings_share_the_validation() {
        let args = CompareArgs {
            synthetic: Some("nonlinear-ar".into()),
            split: Some(1.5),
            ..CompareArgs::default()
        };
        assert_eq!(CompareSettings::resolve(&args).unwrap_err().exit_code(), 2);

        let ok = CompareArgs {
            synthetic: Some("nonlinear-ar".into()),
            ..CompareArgs::default()
        };
        let s = CompareSettings::resolve(&ok).unwrap();
        assert_eq!(s.epochs_ff, DEFAULT_EPOCHS_FF);
        assert_eq!(s.epochs_ekf, DEFAULT_EPOCHS_EKF);
        assert_eq!(s.ekf.tbptt_window, s.window);
    }
}
