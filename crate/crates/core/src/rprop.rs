//! Resilient backpropagation: RPROP+ and iRPROP+ step rules.
//!
//! Both optimizers adapt one step size Δ per weight from gradient signs
//! alone:
//!
//! * sign continued (`g_t * g_{t-1} > 0`): grow Δ by η+ (capped at Δmax)
//!   and step against the gradient sign;
//! * sign flipped (`g_t * g_{t-1} < 0`): shrink Δ by η− (floored at Δmin),
//!   undo the previous step (RPROP+ always; iRPROP+ only when the epoch
//!   error increased), and zero the stored gradient so the next product is
//!   treated as zero;
//! * product zero: keep Δ and step against the current sign (a zero
//!   gradient steps nowhere, since sign(0) = 0).
//!
//! The recorded `prev_delta_w` is always the weight change actually applied
//! this step, so a later backtrack undoes exactly what happened.

use crate::error::{Error, Result};

/// Tunable constants of the RPROP family, with the standard defaults
/// Δ0 = 0.1, η+ = 1.2, η− = 0.5, Δmin = 1e-6, Δmax = 50.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpropConstants {
    pub delta_zero: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub delta_min: f64,
    pub delta_max: f64,
}

impl Default for RpropConstants {
    fn default() -> Self {
        RpropConstants {
            delta_zero: 0.1,
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta_min: 1e-6,
            delta_max: 50.0,
        }
    }
}

impl RpropConstants {
    fn validate(&self) -> Result<()> {
        if !(0.0 < self.eta_minus && self.eta_minus < 1.0 && 1.0 < self.eta_plus) {
            return Err(Error::Domain(format!(
                "need 0 < eta_minus < 1 < eta_plus, got {} and {}",
                self.eta_minus, self.eta_plus
            )));
        }
        if !(0.0 < self.delta_min
            && self.delta_min <= self.delta_zero
            && self.delta_zero <= self.delta_max)
        {
            return Err(Error::Domain(format!(
                "need 0 < delta_min <= delta_zero <= delta_max, got {} / {} / {}",
                self.delta_min, self.delta_zero, self.delta_max
            )));
        }
        Ok(())
    }
}

/// Per-weight optimizer state shared by RPROP+ and iRPROP+.
#[derive(Debug, Clone, PartialEq)]
pub struct RpropState {
    step_sizes: Vec<f64>,
    prev_grad: Vec<f64>,
    prev_delta_w: Vec<f64>,
    prev_error: f64,
    constants: RpropConstants,
}

impl RpropState {
    /// Fresh state for `n_weights` parameters: Δ = Δ0 everywhere, no
    /// gradient history, previous error +∞ (so iRPROP+ never backtracks on
    /// its first flip opportunity).
    pub fn new(n_weights: usize, constants: RpropConstants) -> Result<Self> {
        constants.validate()?;
        Ok(RpropState {
            step_sizes: vec![constants.delta_zero; n_weights],
            prev_grad: vec![0.0; n_weights],
            prev_delta_w: vec![0.0; n_weights],
            prev_error: f64::INFINITY,
            constants,
        })
    }

    pub fn step_sizes(&self) -> &[f64] {
        &self.step_sizes
    }

    pub fn prev_grad(&self) -> &[f64] {
        &self.prev_grad
    }

    pub fn prev_delta_w(&self) -> &[f64] {
        &self.prev_delta_w
    }

    pub fn prev_error(&self) -> f64 {
        self.prev_error
    }

    pub fn constants(&self) -> &RpropConstants {
        &self.constants
    }

    fn check_len(&self, weights: &[f64], grad: &[f64]) -> Result<()> {
        if weights.len() != self.step_sizes.len() || grad.len() != self.step_sizes.len() {
            return Err(Error::Shape(format!(
                "state sized for {} weights, got {} weights and {} gradients",
                self.step_sizes.len(),
                weights.len(),
                grad.len()
            )));
        }
        Ok(())
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Variant selector for the shared kernel: RPROP+ always backtracks on a
/// sign flip; iRPROP+ backtracks only when the error grew.
enum Backtrack {
    Always,
    OnlyIfWorse { error_t: f64 },
}

fn rprop_kernel(
    weights: &[f64],
    grad: &[f64],
    state: &mut RpropState,
    mode: Backtrack,
) -> Vec<f64> {
    let c = state.constants;
    let mut out = weights.to_vec();
    for i in 0..out.len() {
        let g = grad[i];
        let product = g * state.prev_grad[i];
        if product > 0.0 {
            let delta = (state.step_sizes[i] * c.eta_plus).min(c.delta_max);
            let dw = -sign(g) * delta;
            state.step_sizes[i] = delta;
            out[i] += dw;
            state.prev_delta_w[i] = dw;
            state.prev_grad[i] = g;
        } else if product < 0.0 {
            state.step_sizes[i] = (state.step_sizes[i] * c.eta_minus).max(c.delta_min);
            let revert = match mode {
                Backtrack::Always => true,
                Backtrack::OnlyIfWorse { error_t } => error_t > state.prev_error,
            };
            let dw = if revert { -state.prev_delta_w[i] } else { 0.0 };
            out[i] += dw;
            state.prev_delta_w[i] = dw;
            // Forces the next product to zero, skipping a second adaptation.
            state.prev_grad[i] = 0.0;
        } else {
            let dw = -sign(g) * state.step_sizes[i];
            out[i] += dw;
            state.prev_delta_w[i] = dw;
            state.prev_grad[i] = g;
        }
    }
    out
}

/// One RPROP+ step. Returns the updated weights; step sizes and history
/// are updated in place.
pub fn rprop_plus_step(weights: &[f64], grad: &[f64], state: &mut RpropState) -> Result<Vec<f64>> {
    state.check_len(weights, grad)?;
    Ok(rprop_kernel(weights, grad, state, Backtrack::Always))
}

/// One iRPROP+ step: identical to RPROP+ except that on a sign flip the
/// previous step is reverted only when `error_t` exceeds the previous
/// epoch's error. `error_t` becomes the stored previous error afterwards.
pub fn irprop_plus_step(
    weights: &[f64],
    grad: &[f64],
    state: &mut RpropState,
    error_t: f64,
) -> Result<Vec<f64>> {
    state.check_len(weights, grad)?;
    let out = rprop_kernel(weights, grad, state, Backtrack::OnlyIfWorse { error_t });
    state.prev_error = error_t;
    Ok(out)
}
