//! Epoch loop for the feedforward trainers.
//!
//! Every epoch computes the full-batch loss and gradient at the current
//! weights, records the loss, stops if it reached the target, and otherwise
//! applies one optimizer step. The recorded curve therefore holds the error
//! *before* each step, and its length always equals the number of epochs
//! run. Divergence (non-finite loss or weights) stops the run with a
//! `Diverged` report instead of an error, so callers can still inspect the
//! curve.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::mlp::{mlp_gradient, MlpGradient, MlpNetwork};
use crate::preprocess::SupervisedSet;
use crate::rprop::{irprop_plus_step, rprop_plus_step, RpropConstants, RpropState};

/// Why a training run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The recorded epoch error was at or below the target.
    TargetReached,
    /// The epoch budget ran out first.
    MaxEpochs,
    /// A loss or weight became non-finite.
    Diverged,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::TargetReached => "target-reached",
            StopReason::MaxEpochs => "max-epochs",
            StopReason::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Stopping rule: target error plus an epoch budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub target_mse: f64,
    pub max_epochs: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            target_mse: 1e-3,
            max_epochs: 10_000,
        }
    }
}

impl StopCriteria {
    fn validate(&self) -> Result<()> {
        if !(self.target_mse > 0.0 && self.target_mse.is_finite()) {
            return Err(Error::Domain(format!(
                "target MSE must be finite and > 0, got {}",
                self.target_mse
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Domain("epoch budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a training run: per-epoch error curve plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub epochs_run: usize,
    pub error_curve: Vec<f64>,
    pub stop_reason: StopReason,
    /// Wall-clock seconds. Informational only — never serialized into
    /// reproducible artifacts.
    pub wall_time: f64,
}

impl TrainingReport {
    /// Epochs needed to reach the target, when it was reached.
    pub fn epochs_to_target(&self) -> Option<usize> {
        match self.stop_reason {
            StopReason::TargetReached => Some(self.epochs_run),
            _ => None,
        }
    }

    /// Final recorded error, if any epoch ran.
    pub fn final_error(&self) -> Option<f64> {
        self.error_curve.last().copied()
    }
}

/// First-order trainer selection for the feedforward network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedforwardAlgorithm {
    /// Classical full-batch gradient descent at a fixed rate.
    Backprop { rate: f64 },
    /// Sign-adaptive steps with unconditional backtracking.
    RpropPlus,
    /// Sign-adaptive steps with error-gated backtracking.
    IrpropPlus,
}

impl FeedforwardAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            FeedforwardAlgorithm::Backprop { .. } => "backprop",
            FeedforwardAlgorithm::RpropPlus => "rprop+",
            FeedforwardAlgorithm::IrpropPlus => "irprop+",
        }
    }
}

/// One plain gradient-descent step: `w ← w − rate · g` elementwise.
pub fn gd_step(net: &MlpNetwork, grad: &MlpGradient, rate: f64) -> Result<MlpNetwork> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain(format!(
            "learning rate must be finite and > 0, got {rate}"
        )));
    }
    let mut w = net.to_weight_vec();
    let g = grad.to_flat();
    if g.len() != w.len() {
        return Err(Error::Shape(format!(
            "gradient has {} entries, network has {}",
            g.len(),
            w.len()
        )));
    }
    for (wi, gi) in w.iter_mut().zip(&g) {
        *wi -= rate * gi;
    }
    MlpNetwork::from_weight_vec(net.layer_sizes(), &w)
}

/// Trains the feedforward network with the chosen algorithm until the
/// target error, the epoch budget, or divergence.
pub fn train_feedforward(
    net: MlpNetwork,
    train: &SupervisedSet,
    algorithm: FeedforwardAlgorithm,
    stop: &StopCriteria,
) -> Result<(MlpNetwork, TrainingReport)> {
    train_feedforward_with_constants(net, train, algorithm, stop, RpropConstants::default())
}

/// [`train_feedforward`] with explicit RPROP constants (ignored by plain
/// backprop).
pub fn train_feedforward_with_constants(
    mut net: MlpNetwork,
    train: &SupervisedSet,
    algorithm: FeedforwardAlgorithm,
    stop: &StopCriteria,
    constants: RpropConstants,
) -> Result<(MlpNetwork, TrainingReport)> {
    stop.validate()?;
    if train.is_empty() {
        return Err(Error::Domain("training set is empty".into()));
    }
    if let FeedforwardAlgorithm::Backprop { rate } = algorithm {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!(
                "learning rate must be finite and > 0, got {rate}"
            )));
        }
    }

    let started = Instant::now();
    let mut state = RpropState::new(net.weight_count(), constants)?;
    let mut curve = Vec::new();
    let mut reason = StopReason::MaxEpochs;

    for _epoch in 0..stop.max_epochs {
        let (loss, grad) = mlp_gradient(&net, train)?;
        curve.push(loss);
        if !loss.is_finite() {
            reason = StopReason::Diverged;
            break;
        }
        if loss <= stop.target_mse {
            reason = StopReason::TargetReached;
            break;
        }

        let weights = net.to_weight_vec();
        let flat_grad = grad.to_flat();
        let next = match algorithm {
            FeedforwardAlgorithm::Backprop { rate } => {
                let mut w = weights;
                for (wi, gi) in w.iter_mut().zip(&flat_grad) {
                    *wi -= rate * gi;
                }
                w
            }
            FeedforwardAlgorithm::RpropPlus => rprop_plus_step(&weights, &flat_grad, &mut state)?,
            FeedforwardAlgorithm::IrpropPlus => {
                irprop_plus_step(&weights, &flat_grad, &mut state, loss)?
            }
        };
        if next.iter().any(|w| !w.is_finite()) {
            reason = StopReason::Diverged;
            break;
        }
        net = MlpNetwork::from_weight_vec(net.layer_sizes(), &next)?;
    }

    let report = TrainingReport {
        epochs_run: curve.len(),
        error_curve: curve,
        stop_reason: reason,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok((net, report))
}
