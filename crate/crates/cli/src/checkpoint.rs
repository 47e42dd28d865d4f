//! Versioned structured-text model checkpoints.
//!
//! The format is deliberately plain text so artifacts diff cleanly: a
//! version line, a fixed header (model kind, layer sizes, return mode,
//! normalization statistics, seed, config hash), then one weight per line
//! in canonical enumeration order. Weights are written with 17 significant
//! digits, which round-trips every finite double exactly, so a reloaded
//! model's forward pass is bit-identical to the saved one.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ratecast::elman::ElmanNetwork;
use ratecast::mlp::MlpNetwork;
use ratecast::preprocess::{NormalizationParams, ReturnMode};

const VERSION_LINE: &str = "ratecast checkpoint v1";
const VERSION_PREFIX: &str = "ratecast checkpoint ";

/// Failures specific to checkpoint persistence.
#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported checkpoint version {0:?} (this build reads {VERSION_LINE:?})")]
    Version(String),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

type CkResult<T> = Result<T, CheckpointError>;

/// Either trained network, behind one persistence surface.
#[derive(Debug, Clone)]
pub enum SavedModel {
    Feedforward(MlpNetwork),
    Elman(ElmanNetwork),
}

impl SavedModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedModel::Feedforward(_) => "ff",
            SavedModel::Elman(_) => "elman",
        }
    }

    pub fn layer_sizes(&self) -> [usize; 3] {
        match self {
            SavedModel::Feedforward(net) => net.layer_sizes(),
            SavedModel::Elman(net) => net.layer_sizes(),
        }
    }

    pub fn to_weight_vec(&self) -> Vec<f64> {
        match self {
            SavedModel::Feedforward(net) => net.to_weight_vec(),
            SavedModel::Elman(net) => net.to_weight_vec(),
        }
    }
}

/// Everything needed to reload a trained model and run it on fresh data.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: SavedModel,
    pub params: NormalizationParams,
    pub seed: u64,
    pub config_hash: String,
}

/// Renders a checkpoint to its canonical text form.
pub fn render_checkpoint(ck: &Checkpoint) -> String {
    let sizes = ck.model.layer_sizes();
    let mut s = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(s, "{VERSION_LINE}");
    let _ = writeln!(s, "model: {}", ck.model.kind_name());
    let _ = writeln!(s, "layers: {} {} {}", sizes[0], sizes[1], sizes[2]);
    let _ = writeln!(s, "mode: {}", ck.params.mode);
    let _ = writeln!(s, "norm-mean: {:.16e}", ck.params.mean);
    let _ = writeln!(s, "norm-std: {:.16e}", ck.params.std);
    let _ = writeln!(s, "seed: {}", ck.seed);
    let _ = writeln!(s, "config-hash: {}", ck.config_hash);
    let weights = ck.model.to_weight_vec();
    let _ = writeln!(s, "weights: {}", weights.len());
    for w in &weights {
        let _ = writeln!(s, "{w:.16e}");
    }
    s
}

/// Writes a checkpoint to `path`.
pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> CkResult<()> {
    std::fs::write(path, render_checkpoint(ck))?;
    Ok(())
}

/// Reads a checkpoint back; the reconstructed model's forward pass is
/// bit-identical to the one that was saved.
pub fn load_checkpoint(path: &Path) -> CkResult<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    parse_checkpoint(&text)
}

fn corrupt(msg: impl Into<String>) -> CheckpointError {
    CheckpointError::Corrupt(msg.into())
}

/// Takes the next line and strips a required `key: ` prefix.
fn field<'a>(lines: &mut std::str::Lines<'a>, key: &str) -> CkResult<&'a str> {
    let line = lines
        .next()
        .ok_or_else(|| corrupt(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(": "))
        .map(str::trim)
        .ok_or_else(|| corrupt(format!("expected `{key}: ...`, found {line:?}")))
}

fn parse_num<T: FromStr>(text: &str, what: &str) -> CkResult<T> {
    text.parse()
        .map_err(|_| corrupt(format!("unreadable {what}: {text:?}")))
}

fn parse_checkpoint(text: &str) -> CkResult<Checkpoint> {
    let mut lines = text.lines();
    match lines.next() {
        Some(VERSION_LINE) => {}
        Some(line) if line.starts_with(VERSION_PREFIX) => {
            return Err(CheckpointError::Version(line.to_string()));
        }
        _ => return Err(corrupt("not a ratecast checkpoint")),
    }

    let kind = field(&mut lines, "model")?.to_string();
    let layers_text = field(&mut lines, "layers")?;
    let mut sizes = [0usize; 3];
    let mut parts = layers_text.split_whitespace();
    for slot in &mut sizes {
        let tok = parts
            .next()
            .ok_or_else(|| corrupt(format!("layers line needs 3 sizes: {layers_text:?}")))?;
        *slot = parse_num(tok, "layer size")?;
    }
    if parts.next().is_some() {
        return Err(corrupt(format!(
            "layers line needs exactly 3 sizes: {layers_text:?}"
        )));
    }

    let mode: ReturnMode = field(&mut lines, "mode")?
        .parse()
        .map_err(|e: ratecast::Error| corrupt(e.to_string()))?;
    let mean: f64 = parse_num(field(&mut lines, "norm-mean")?, "norm-mean")?;
    let std: f64 = parse_num(field(&mut lines, "norm-std")?, "norm-std")?;
    if !mean.is_finite() || !(std.is_finite() && std > 0.0) {
        return Err(corrupt(format!(
            "normalization statistics out of range: mean {mean}, std {std}"
        )));
    }
    let seed: u64 = parse_num(field(&mut lines, "seed")?, "seed")?;
    let config_hash = field(&mut lines, "config-hash")?.to_string();
    let n_weights: usize = parse_num(field(&mut lines, "weights")?, "weight count")?;

    let mut weights = Vec::with_capacity(n_weights);
    for _ in 0..n_weights {
        let line = lines.next().ok_or_else(|| {
            corrupt(format!(
                "truncated: expected {n_weights} weights, found {}",
                weights.len()
            ))
        })?;
        let w: f64 = parse_num(line.trim(), "weight")?;
        if !w.is_finite() {
            return Err(corrupt(format!("non-finite weight {line:?}")));
        }
        weights.push(w);
    }
    if let Some(extra) = lines.next() {
        return Err(corrupt(format!("trailing content after weights: {extra:?}")));
    }

    let model = match kind.as_str() {
        "ff" => SavedModel::Feedforward(
            MlpNetwork::from_weight_vec(sizes, &weights).map_err(|e| corrupt(e.to_string()))?,
        ),
        "elman" => {
            if sizes[2] != 1 {
                return Err(corrupt(format!(
                    "elman checkpoints are single-output, layers say {}",
                    sizes[2]
                )));
            }
            SavedModel::Elman(
                ElmanNetwork::from_weight_vec(sizes[0], sizes[1], &weights)
                    .map_err(|e| corrupt(e.to_string()))?,
            )
        }
        other => return Err(corrupt(format!("unknown model kind {other:?}"))),
    };

    Ok(Checkpoint {
        model,
        params: NormalizationParams { mean, std, mode },
        seed,
        config_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratecast::elman::{elman_run, HiddenState};
    use ratecast::linalg::Matrix;
    use ratecast::mlp::mlp_forward;
    use ratecast::rng::Rng;

    fn ff_checkpoint(seed: u64) -> Checkpoint {
        Checkpoint {
            model: SavedModel::Feedforward(MlpNetwork::init([6, 5, 1], seed, 0.7).unwrap()),
            params: NormalizationParams {
                mean: 2.304_959_503_413_129e-4,
                std: 6.543_210_987_654_321e-3,
                mode: ReturnMode::LogDiff,
            },
            seed,
            config_hash: "a3f09b2c41d88e07".into(),
        }
    }

    fn elman_checkpoint(seed: u64) -> Checkpoint {
        Checkpoint {
            model: SavedModel::Elman(ElmanNetwork::init(4, 3, seed, 0.6).unwrap()),
            params: NormalizationParams {
                mean: -1.5e-5,
                std: 0.012,
                mode: ReturnMode::LogRatio,
            },
            seed,
            config_hash: "00ff00ff00ff00ff".into(),
        }
    }

    #[test]
    fn feedforward_round_trip_is_bit_identical_on_random_inputs() {
        let ck = ff_checkpoint(9);
        let text = render_checkpoint(&ck);
        let back = parse_checkpoint(&text).unwrap();
        let (SavedModel::Feedforward(orig), SavedModel::Feedforward(loaded)) =
            (&ck.model, &back.model)
        else {
            panic!("model kind changed in round trip");
        };
        let mut rng = Rng::from_seed(77);
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
            let (y0, _) = mlp_forward(orig, &x).unwrap();
            let (y1, _) = mlp_forward(loaded, &x).unwrap();
            assert_eq!(y0[0].to_bits(), y1[0].to_bits());
        }
        assert_eq!(back.params.mean, ck.params.mean);
        assert_eq!(back.params.std, ck.params.std);
        assert_eq!(back.params.mode, ck.params.mode);
        assert_eq!(back.seed, ck.seed);
        assert_eq!(back.config_hash, ck.config_hash);
    }

    #[test]
    fn elman_round_trip_is_bit_identical_over_a_sequence() {
        let ck = elman_checkpoint(31);
        let back = parse_checkpoint(&render_checkpoint(&ck)).unwrap();
        let (SavedModel::Elman(orig), SavedModel::Elman(loaded)) = (&ck.model, &back.model) else {
            panic!("model kind changed in round trip");
        };
        let mut rng = Rng::from_seed(5);
        let data: Vec<f64> = (0..12 * 4).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let inputs = Matrix::from_vec(12, 4, data).unwrap();
        let y0 = elman_run(orig, &inputs, &HiddenState::zero(3)).unwrap();
        let y1 = elman_run(loaded, &inputs, &HiddenState::zero(3)).unwrap();
        for (a, b) in y0.iter().zip(&y1) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn resave_is_byte_identical() {
        let text = render_checkpoint(&ff_checkpoint(123));
        let again = render_checkpoint(&parse_checkpoint(&text).unwrap());
        assert_eq!(text, again);
    }

    #[test]
    fn future_version_is_refused_as_version_error() {
        let text = render_checkpoint(&ff_checkpoint(1)).replace("checkpoint v1", "checkpoint v2");
        assert!(matches!(
            parse_checkpoint(&text),
            Err(CheckpointError::Version(_))
        ));
    }

    #[test]
    fn foreign_text_is_corrupt_not_version_error() {
        assert!(matches!(
            parse_checkpoint("date,rate\n2020-01-01,4.1\n"),
            Err(CheckpointError::Corrupt(_))
        ));
    }

    #[test]
    fn truncated_weights_are_corrupt() {
        let text = render_checkpoint(&ff_checkpoint(2));
        let keep = text.lines().count() - 4;
        let cut: String = text.lines().take(keep).map(|l| format!("{l}\n")).collect();
        let err = parse_checkpoint(&cut).unwrap_err();
        assert!(matches!(err, CheckpointError::Corrupt(_)), "{err}");
        assert!(err.to_string().contains("truncated"));
    }

    #[test]
    fn trailing_garbage_is_corrupt() {
        let mut text = render_checkpoint(&ff_checkpoint(3));
        text.push_str("extra\n");
        assert!(matches!(
            parse_checkpoint(&text),
            Err(CheckpointError::Corrupt(_))
        ));
    }

    #[test]
    fn weight_count_mismatch_is_corrupt() {
        // Declare one weight fewer than the architecture needs: the final
        // weight line then reads as trailing content.
        let text = render_checkpoint(&ff_checkpoint(4)).replace("weights: 41", "weights: 40");
        assert!(matches!(
            parse_checkpoint(&text),
            Err(CheckpointError::Corrupt(_))
        ));
    }

    #[test]
    fn non_finite_weight_is_corrupt() {
        let ck = ff_checkpoint(5);
        let w0 = format!("{:.16e}", ck.model.to_weight_vec()[0]);
        let text = render_checkpoint(&ck).replacen(&w0, "nan", 1);
        assert!(matches!(
            parse_checkpoint(&text),
            Err(CheckpointError::Corrupt(_))
        ));
    }

    #[test]
    fn bad_statistics_are_corrupt() {
        let text = render_checkpoint(&ff_checkpoint(6));
        let std_line = text
            .lines()
            .find(|l| l.starts_with("norm-std"))
            .unwrap()
            .to_string();
        let zeroed = text.replace(&std_line, "norm-std: 0.0000000000000000e0");
        assert!(matches!(
            parse_checkpoint(&zeroed),
            Err(CheckpointError::Corrupt(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_checkpoint(Path::new("/nonexistent/nope.ckpt")).unwrap_err();
        assert!(matches!(err, CheckpointError::Io(_)));
    }

    #[test]
    fn save_and_load_through_the_filesystem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let ck = elman_checkpoint(8);
        save_checkpoint(&ck, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.model.to_weight_vec(), ck.model.to_weight_vec());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), render_checkpoint(&back));
    }
}
