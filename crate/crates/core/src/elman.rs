//! Elman simple recurrent network with truncated-BPTT output derivatives.
//!
//! Each time step feeds a sliding window of the last `n_in` normalized
//! values into a fully recurrent tanh hidden layer with a linear scalar
//! read-out:
//!
//! ```text
//! a  = W_in · x + W_rec · h + b_h
//! h' = tanh(a)
//! y  = w_out · h' + b_out
//! ```
//!
//! [`tbptt_jacobian`] computes ∂y/∂w for every weight, with recurrent
//! credit assignment cut after a fixed number of steps back. The entries
//! follow the canonical weight enumeration shared with the Kalman-filter
//! trainer: input weights row-major, recurrent weights row-major, hidden
//! bias, output weights, output bias.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::Rng;

/// Recurrent network with a scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmanNetwork {
    n_in: usize,
    n_hidden: usize,
    input_weights: Matrix,     // n_hidden x n_in
    recurrent_weights: Matrix, // n_hidden x n_hidden
    hidden_bias: Vec<f64>,     // n_hidden
    output_weights: Vec<f64>,  // n_hidden (single output row)
    output_bias: f64,
}

/// Hidden activations carried between steps. Zero at a stream start; after
/// any step every component lies in [−1, 1] (tanh saturates to exactly ±1
/// in double precision).
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    h: Vec<f64>,
}

impl HiddenState {
    /// The all-zero reset state.
    pub fn zero(n_hidden: usize) -> Self {
        HiddenState {
            h: vec![0.0; n_hidden],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// One step's worth of context for backpropagation through time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Input window fed at this step.
    pub input: Vec<f64>,
    /// Hidden state *before* the step (the context units).
    pub h_prev: Vec<f64>,
    /// Hidden state *after* the step.
    pub h_new: Vec<f64>,
}

/// Ring of the most recent step records, oldest first, capped at the
/// truncation window.
#[derive(Debug, Clone)]
pub struct StreamBuffer {
    window: usize,
    records: VecDeque<StepRecord>,
}

impl StreamBuffer {
    /// Buffer that retains at most `window` records.
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Domain("buffer window must be at least 1".into()));
        }
        Ok(StreamBuffer {
            window,
            records: VecDeque::with_capacity(window),
        })
    }

    /// Appends a record, discarding the oldest once the window is full.
    pub fn push(&mut self, record: StepRecord) {
        if self.records.len() == self.window {
            self.records.pop_front();
        }
        self.records.push_back(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Record `i` counting from the oldest retained step.
    pub fn record(&self, i: usize) -> &StepRecord {
        &self.records[i]
    }

    /// Drops all records (used at stream resets).
    pub fn clear(&mut self) {
        self.records.clear();
    }
}

impl ElmanNetwork {
    /// Initializes with weights uniform in `[-scale, +scale]` and zero
    /// biases, drawing in the canonical weight order (input weights, then
    /// recurrent weights, then output weights).
    pub fn init(n_in: usize, n_hidden: usize, seed: u64, scale: f64) -> Result<Self> {
        if n_in == 0 || n_hidden == 0 {
            return Err(Error::Domain(format!(
                "layer sizes must be >= 1, got n_in={n_in}, n_hidden={n_hidden}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "init scale must be finite and > 0, got {scale}"
            )));
        }
        let mut rng = Rng::from_seed(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.uniform_in(-scale, scale)).collect()
        };
        Ok(ElmanNetwork {
            n_in,
            n_hidden,
            input_weights: Matrix::from_vec(n_hidden, n_in, draw(n_hidden * n_in))?,
            recurrent_weights: Matrix::from_vec(n_hidden, n_hidden, draw(n_hidden * n_hidden))?,
            hidden_bias: vec![0.0; n_hidden],
            output_weights: draw(n_hidden),
            output_bias: 0.0,
        })
    }

    /// Builds a network from explicit parts. Shapes must be consistent.
    pub fn from_parts(
        input_weights: Matrix,
        recurrent_weights: Matrix,
        hidden_bias: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Result<Self> {
        let n_hidden = input_weights.rows();
        let n_in = input_weights.cols();
        if recurrent_weights.rows() != n_hidden
            || recurrent_weights.cols() != n_hidden
            || hidden_bias.len() != n_hidden
            || output_weights.len() != n_hidden
        {
            return Err(Error::Shape(format!(
                "inconsistent shapes: input {}x{}, recurrent {}x{}, hidden bias {}, output {}",
                n_hidden,
                n_in,
                recurrent_weights.rows(),
                recurrent_weights.cols(),
                hidden_bias.len(),
                output_weights.len()
            )));
        }
        let net = ElmanNetwork {
            n_in,
            n_hidden,
            input_weights,
            recurrent_weights,
            hidden_bias,
            output_weights,
            output_bias,
        };
        if !net.all_finite() {
            return Err(Error::Domain("network weights must be finite".into()));
        }
        Ok(net)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    /// `[n_in, n_hidden, 1]` — the output layer is always scalar.
    pub fn layer_sizes(&self) -> [usize; 3] {
        [self.n_in, self.n_hidden, 1]
    }

    pub fn input_weights(&self) -> &Matrix {
        &self.input_weights
    }

    pub fn recurrent_weights(&self) -> &Matrix {
        &self.recurrent_weights
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    /// Total parameter count:
    /// `n_hidden·n_in + n_hidden² + n_hidden + n_hidden + 1`.
    pub fn weight_count(&self) -> usize {
        self.n_hidden * self.n_in + self.n_hidden * self.n_hidden + self.n_hidden + self.n_hidden + 1
    }

    pub fn all_finite(&self) -> bool {
        self.input_weights.all_finite()
            && self.recurrent_weights.all_finite()
            && self.hidden_bias.iter().all(|v| v.is_finite())
            && self.output_weights.iter().all(|v| v.is_finite())
            && self.output_bias.is_finite()
    }

    /// Flattens all parameters in the canonical weight order.
    pub fn to_weight_vec(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.weight_count());
        flat.extend_from_slice(self.input_weights.as_slice());
        flat.extend_from_slice(self.recurrent_weights.as_slice());
        flat.extend_from_slice(&self.hidden_bias);
        flat.extend_from_slice(&self.output_weights);
        flat.push(self.output_bias);
        flat
    }

    /// Rebuilds a network from a canonical-order flat vector.
    pub fn from_weight_vec(n_in: usize, n_hidden: usize, flat: &[f64]) -> Result<Self> {
        let expect = n_hidden * n_in + n_hidden * n_hidden + n_hidden + n_hidden + 1;
        if flat.len() != expect {
            return Err(Error::Shape(format!(
                "weight vector has {} entries, ({n_in}, {n_hidden}, 1) needs {expect}",
                flat.len()
            )));
        }
        let mut at = 0usize;
        let mut take = |n: usize| {
            let s = &flat[at..at + n];
            at += n;
            s.to_vec()
        };
        let input_weights = Matrix::from_vec(n_hidden, n_in, take(n_hidden * n_in))?;
        let recurrent_weights = Matrix::from_vec(n_hidden, n_hidden, take(n_hidden * n_hidden))?;
        let hidden_bias = take(n_hidden);
        let output_weights = take(n_hidden);
        let output_bias = flat[expect - 1];
        ElmanNetwork::from_parts(
            input_weights,
            recurrent_weights,
            hidden_bias,
            output_weights,
            output_bias,
        )
    }
}

/// Advances the network one step: returns the scalar output and the new
/// hidden state.
pub fn elman_step(
    net: &ElmanNetwork,
    state: &HiddenState,
    input: &[f64],
) -> Result<(f64, HiddenState)> {
    if input.len() != net.n_in {
        return Err(Error::Shape(format!(
            "input has {} values, network expects {}",
            input.len(),
            net.n_in
        )));
    }
    if state.h.len() != net.n_hidden {
        return Err(Error::Shape(format!(
            "hidden state has {} units, network expects {}",
            state.h.len(),
            net.n_hidden
        )));
    }
    if input.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("input contains non-finite values".into()));
    }
    let mut a = net.input_weights.matvec(input);
    let rec = net.recurrent_weights.matvec(&state.h);
    for ((ai, ri), bi) in a.iter_mut().zip(&rec).zip(&net.hidden_bias) {
        *ai = (*ai + ri + bi).tanh();
    }
    let y = dot(&net.output_weights, &a) + net.output_bias;
    Ok((y, HiddenState { h: a }))
}

/// Runs the network over consecutive window rows, threading the hidden
/// state; returns one output per row.
pub fn elman_run(net: &ElmanNetwork, inputs: &Matrix, initial: &HiddenState) -> Result<Vec<f64>> {
    elman_run_with_state(net, inputs, initial).map(|(outputs, _)| outputs)
}

/// Like [`elman_run`] but also returns the final hidden state, so callers
/// can warm the state on one segment and continue scoring on the next.
pub fn elman_run_with_state(
    net: &ElmanNetwork,
    inputs: &Matrix,
    initial: &HiddenState,
) -> Result<(Vec<f64>, HiddenState)> {
    if inputs.rows() == 0 {
        return Err(Error::Shape("input sequence is empty".into()));
    }
    let mut state = initial.clone();
    let mut outputs = Vec::with_capacity(inputs.rows());
    for i in 0..inputs.rows() {
        let (y, next) = elman_step(net, &state, inputs.row(i))?;
        outputs.push(y);
        state = next;
    }
    Ok((outputs, state))
}

/// Derivative of the newest recorded output with respect to every weight,
/// truncated `window` steps back, in canonical weight order.
///
/// Walking records newest → oldest, the sensitivity ψ = ∂y/∂h_τ is pushed
/// backwards through `h_τ = tanh(a_τ)` and the pre-activation
/// `a_τ = W_in x_τ + W_rec h_{τ-1} + b_h`; hidden state older than the
/// retained window is treated as a constant.
pub fn tbptt_jacobian(net: &ElmanNetwork, buffer: &StreamBuffer, window: usize) -> Result<Vec<f64>> {
    if buffer.is_empty() {
        return Err(Error::Shape(
            "cannot differentiate an empty stream buffer".into(),
        ));
    }
    if window == 0 {
        return Err(Error::Domain("truncation window must be at least 1".into()));
    }
    let nh = net.n_hidden;
    let ni = net.n_in;
    for i in 0..buffer.len() {
        let r = buffer.record(i);
        if r.input.len() != ni || r.h_prev.len() != nh || r.h_new.len() != nh {
            return Err(Error::Shape(format!(
                "record {i} has shapes ({}, {}, {}), expected ({ni}, {nh}, {nh})",
                r.input.len(),
                r.h_prev.len(),
                r.h_new.len()
            )));
        }
    }

    let off_rec = nh * ni;
    let off_hb = off_rec + nh * nh;
    let off_ow = off_hb + nh;
    let off_ob = off_ow + nh;
    let mut jac = vec![0.0; off_ob + 1];

    let newest = buffer.len() - 1;
    let depth = window.min(buffer.len());

    // Output layer: y = w_out · h_T + b_out.
    let h_t = &buffer.record(newest).h_new;
    jac[off_ow..off_ow + nh].copy_from_slice(h_t);
    jac[off_ob] = 1.0;

    // ψ starts as ∂y/∂h_T = w_out and is pulled back one step per record.
    let mut psi = net.output_weights.clone();
    for back in 0..depth {
        let rec = buffer.record(newest - back);
        // δ = ψ ⊙ tanh'(a_τ) with tanh'(a) = 1 − h_τ².
        let delta: Vec<f64> = psi
            .iter()
            .zip(&rec.h_new)
            .map(|(p, h)| p * (1.0 - h * h))
            .collect();
        for (j, &dj) in delta.iter().enumerate() {
            let row = &mut jac[j * ni..(j + 1) * ni];
            for (g, x) in row.iter_mut().zip(&rec.input) {
                *g += dj * x;
            }
            let row = &mut jac[off_rec + j * nh..off_rec + (j + 1) * nh];
            for (g, h) in row.iter_mut().zip(&rec.h_prev) {
                *g += dj * h;
            }
            jac[off_hb + j] += dj;
        }
        // ψ ← W_rec^T δ for the next-older step.
        psi = net.recurrent_weights.matvec_t(&delta);
    }
    Ok(jac)
}
