//! Feedforward network: identity input, tanh hidden layer, identity output.
//!
//! The batch loss is the mean over samples of the squared error summed over
//! output units; gradients are exact analytic backpropagation over the full
//! batch. Batch work is split into fixed 64-sample chunks: each chunk is
//! accumulated sequentially in sample order and chunk partials are combined
//! in chunk order, so the parallel and sequential paths produce bit-identical
//! results. [`mlp_gradient_seq`] and [`mlp_loss_seq`] are the always-compiled
//! sequential reference paths used by the benchmark suite and the
//! determinism tests.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::preprocess::SupervisedSet;
use crate::rng::Rng;

/// Samples per accumulation chunk. Fixed so that chunk boundaries — and
/// therefore floating-point summation order — never depend on thread count.
pub(crate) const BATCH_CHUNK: usize = 64;

/// Dense `[n_in, n_hidden, n_out]` network with tanh hidden units and
/// linear input/output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layer_sizes: [usize; 3],
    hidden_weights: Matrix, // n_hidden x n_in
    hidden_bias: Vec<f64>,  // n_hidden
    output_weights: Matrix, // n_out x n_hidden
    output_bias: Vec<f64>,  // n_out
}

/// Gradient of the batch loss, shaped exactly like the network's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub hidden_weights: Matrix,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Matrix,
    pub output_bias: Vec<f64>,
}

impl MlpGradient {
    fn zeros(sizes: [usize; 3]) -> Self {
        MlpGradient {
            hidden_weights: Matrix::zeros(sizes[1], sizes[0]),
            hidden_bias: vec![0.0; sizes[1]],
            output_weights: Matrix::zeros(sizes[2], sizes[1]),
            output_bias: vec![0.0; sizes[2]],
        }
    }

    /// Flattens into the canonical weight order: hidden weights row-major,
    /// hidden bias, output weights row-major, output bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(
            self.hidden_weights.as_slice().len()
                + self.hidden_bias.len()
                + self.output_weights.as_slice().len()
                + self.output_bias.len(),
        );
        flat.extend_from_slice(self.hidden_weights.as_slice());
        flat.extend_from_slice(&self.hidden_bias);
        flat.extend_from_slice(self.output_weights.as_slice());
        flat.extend_from_slice(&self.output_bias);
        flat
    }

    fn scale(&mut self, s: f64) {
        for v in self.hidden_weights.as_mut_slice() {
            *v *= s;
        }
        for v in &mut self.hidden_bias {
            *v *= s;
        }
        for v in self.output_weights.as_mut_slice() {
            *v *= s;
        }
        for v in &mut self.output_bias {
            *v *= s;
        }
    }

    fn add(&mut self, other: &MlpGradient) {
        let pairs = [
            (
                self.hidden_weights.as_mut_slice(),
                other.hidden_weights.as_slice(),
            ),
            (&mut self.hidden_bias[..], &other.hidden_bias[..]),
            (
                self.output_weights.as_mut_slice(),
                other.output_weights.as_slice(),
            ),
            (&mut self.output_bias[..], &other.output_bias[..]),
        ];
        for (dst, src) in pairs {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

impl MlpNetwork {
    /// Initializes a network with weights drawn uniformly from
    /// `[-scale, +scale]` and zero biases. Draws are consumed in the
    /// canonical weight order (hidden weights row-major, then output
    /// weights row-major), so a given seed always yields the same network.
    pub fn init(layer_sizes: [usize; 3], seed: u64, scale: f64) -> Result<Self> {
        if layer_sizes.contains(&0) {
            return Err(Error::Domain(format!(
                "all layer sizes must be >= 1, got {layer_sizes:?}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "init scale must be finite and > 0, got {scale}"
            )));
        }
        let [n_in, n_hidden, n_out] = layer_sizes;
        let mut rng = Rng::from_seed(seed);
        let mut draw = |rows: usize, cols: usize| {
            let data = (0..rows * cols)
                .map(|_| rng.uniform_in(-scale, scale))
                .collect();
            Matrix::from_vec(rows, cols, data).expect("sized buffer")
        };
        let hidden_weights = draw(n_hidden, n_in);
        let output_weights = draw(n_out, n_hidden);
        Ok(MlpNetwork {
            layer_sizes,
            hidden_weights,
            hidden_bias: vec![0.0; n_hidden],
            output_weights,
            output_bias: vec![0.0; n_out],
        })
    }

    /// Builds a network from explicit parts. Shapes must be consistent.
    pub fn from_parts(
        hidden_weights: Matrix,
        hidden_bias: Vec<f64>,
        output_weights: Matrix,
        output_bias: Vec<f64>,
    ) -> Result<Self> {
        let n_hidden = hidden_weights.rows();
        let n_in = hidden_weights.cols();
        let n_out = output_weights.rows();
        if hidden_bias.len() != n_hidden
            || output_weights.cols() != n_hidden
            || output_bias.len() != n_out
        {
            return Err(Error::Shape(format!(
                "inconsistent shapes: hidden {}x{}, hidden bias {}, output {}x{}, output bias {}",
                n_hidden,
                n_in,
                hidden_bias.len(),
                output_weights.rows(),
                output_weights.cols(),
                output_bias.len()
            )));
        }
        let net = MlpNetwork {
            layer_sizes: [n_in, n_hidden, n_out],
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
        };
        if !net.all_finite() {
            return Err(Error::Domain("network weights must be finite".into()));
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> [usize; 3] {
        self.layer_sizes
    }

    pub fn hidden_weights(&self) -> &Matrix {
        &self.hidden_weights
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    pub fn output_weights(&self) -> &Matrix {
        &self.output_weights
    }

    pub fn output_bias(&self) -> &[f64] {
        &self.output_bias
    }

    /// Total number of weights and biases.
    pub fn weight_count(&self) -> usize {
        let [n_in, n_hidden, n_out] = self.layer_sizes;
        n_hidden * n_in + n_hidden + n_out * n_hidden + n_out
    }

    pub fn all_finite(&self) -> bool {
        self.hidden_weights.all_finite()
            && self.hidden_bias.iter().all(|v| v.is_finite())
            && self.output_weights.all_finite()
            && self.output_bias.iter().all(|v| v.is_finite())
    }

    /// Flattens all parameters in the canonical weight order.
    pub fn to_weight_vec(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.weight_count());
        flat.extend_from_slice(self.hidden_weights.as_slice());
        flat.extend_from_slice(&self.hidden_bias);
        flat.extend_from_slice(self.output_weights.as_slice());
        flat.extend_from_slice(&self.output_bias);
        flat
    }

    /// Rebuilds a network from a canonical-order flat vector.
    pub fn from_weight_vec(layer_sizes: [usize; 3], flat: &[f64]) -> Result<Self> {
        let [n_in, n_hidden, n_out] = layer_sizes;
        let expect = n_hidden * n_in + n_hidden + n_out * n_hidden + n_out;
        if flat.len() != expect {
            return Err(Error::Shape(format!(
                "weight vector has {} entries, {layer_sizes:?} needs {expect}",
                flat.len()
            )));
        }
        let mut at = 0usize;
        let mut take = |n: usize| {
            let s = &flat[at..at + n];
            at += n;
            s.to_vec()
        };
        let hidden_weights = Matrix::from_vec(n_hidden, n_in, take(n_hidden * n_in))?;
        let hidden_bias = take(n_hidden);
        let output_weights = Matrix::from_vec(n_out, n_hidden, take(n_out * n_hidden))?;
        let output_bias = take(n_out);
        MlpNetwork::from_parts(hidden_weights, hidden_bias, output_weights, output_bias)
    }
}

fn check_input(net: &MlpNetwork, input: &[f64]) -> Result<()> {
    if input.len() != net.layer_sizes[0] {
        return Err(Error::Shape(format!(
            "input has {} values, network expects {}",
            input.len(),
            net.layer_sizes[0]
        )));
    }
    if input.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("input contains non-finite values".into()));
    }
    Ok(())
}

/// Single forward pass: `h = tanh(W_h x + b_h)`, `y = W_o h + b_o`.
/// Returns the output and the hidden activations (reused by gradients).
pub fn mlp_forward(net: &MlpNetwork, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_input(net, input)?;
    let mut h = net.hidden_weights.matvec(input);
    for (a, b) in h.iter_mut().zip(&net.hidden_bias) {
        *a = (*a + b).tanh();
    }
    let mut y = net.output_weights.matvec(&h);
    for (o, b) in y.iter_mut().zip(&net.output_bias) {
        *o += b;
    }
    Ok((y, h))
}

fn check_batch(net: &MlpNetwork, inputs: &Matrix, targets: &Matrix) -> Result<()> {
    if inputs.rows() == 0 {
        return Err(Error::Domain("batch must be non-empty".into()));
    }
    if inputs.cols() != net.layer_sizes[0] {
        return Err(Error::Shape(format!(
            "batch inputs have {} columns, network expects {}",
            inputs.cols(),
            net.layer_sizes[0]
        )));
    }
    if targets.rows() != inputs.rows() || targets.cols() != net.layer_sizes[2] {
        return Err(Error::Shape(format!(
            "targets are {}x{}, expected {}x{}",
            targets.rows(),
            targets.cols(),
            inputs.rows(),
            net.layer_sizes[2]
        )));
    }
    Ok(())
}

/// Loss and raw gradient sums for one chunk of samples, accumulated in
/// sample order. The `2/N` loss scaling is applied once at the end of the
/// batch, not per sample.
fn gradient_chunk(
    net: &MlpNetwork,
    inputs: &Matrix,
    targets: &Matrix,
    lo: usize,
    hi: usize,
) -> (f64, MlpGradient) {
    let mut acc = MlpGradient::zeros(net.layer_sizes);
    let mut sq_sum = 0.0;
    for s in lo..hi {
        let x = inputs.row(s);
        let mut h = net.hidden_weights.matvec(x);
        for (a, b) in h.iter_mut().zip(&net.hidden_bias) {
            *a = (*a + b).tanh();
        }
        // e_j = y_j - t_j; the per-sample squared error is sum_j e_j^2.
        let mut e = net.output_weights.matvec(&h);
        for ((o, b), t) in e.iter_mut().zip(&net.output_bias).zip(targets.row(s)) {
            *o = *o + b - t;
        }
        sq_sum += dot(&e, &e);
        acc.output_weights.add_outer(&e, &h, 1.0);
        for (g, ej) in acc.output_bias.iter_mut().zip(&e) {
            *g += ej;
        }
        // delta_h = (W_o^T e) ⊙ (1 - h^2).
        let mut dh = net.output_weights.matvec_t(&e);
        for (d, hj) in dh.iter_mut().zip(&h) {
            *d *= 1.0 - hj * hj;
        }
        acc.hidden_weights.add_outer(&dh, x, 1.0);
        for (g, dj) in acc.hidden_bias.iter_mut().zip(&dh) {
            *g += dj;
        }
    }
    (sq_sum, acc)
}

fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(BATCH_CHUNK))
        .map(|c| (c * BATCH_CHUNK, ((c + 1) * BATCH_CHUNK).min(n)))
        .collect()
}

fn combine_gradient(
    net: &MlpNetwork,
    n: usize,
    partials: Vec<(f64, MlpGradient)>,
) -> (f64, MlpGradient) {
    let mut sq_sum = 0.0;
    let mut grad = MlpGradient::zeros(net.layer_sizes);
    for (s, g) in &partials {
        sq_sum += s;
        grad.add(g);
    }
    grad.scale(2.0 / n as f64);
    (sq_sum / n as f64, grad)
}

/// Batch MSE and its exact gradient for arbitrary multi-output targets.
/// Uses the parallel path when the `parallel` feature is enabled; results
/// are bit-identical to [`mlp_batch_gradient_seq`] either way.
pub fn mlp_batch_gradient(
    net: &MlpNetwork,
    inputs: &Matrix,
    targets: &Matrix,
) -> Result<(f64, MlpGradient)> {
    check_batch(net, inputs, targets)?;
    let n = inputs.rows();
    let ranges = chunk_ranges(n);
    #[cfg(feature = "parallel")]
    let partials: Vec<(f64, MlpGradient)> = ranges
        .par_iter()
        .map(|&(lo, hi)| gradient_chunk(net, inputs, targets, lo, hi))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<(f64, MlpGradient)> = ranges
        .iter()
        .map(|&(lo, hi)| gradient_chunk(net, inputs, targets, lo, hi))
        .collect();
    Ok(combine_gradient(net, n, partials))
}

/// Sequential reference implementation of [`mlp_batch_gradient`].
pub fn mlp_batch_gradient_seq(
    net: &MlpNetwork,
    inputs: &Matrix,
    targets: &Matrix,
) -> Result<(f64, MlpGradient)> {
    check_batch(net, inputs, targets)?;
    let n = inputs.rows();
    let partials: Vec<(f64, MlpGradient)> = chunk_ranges(n)
        .iter()
        .map(|&(lo, hi)| gradient_chunk(net, inputs, targets, lo, hi))
        .collect();
    Ok(combine_gradient(net, n, partials))
}

fn loss_chunk(net: &MlpNetwork, inputs: &Matrix, targets: &Matrix, lo: usize, hi: usize) -> f64 {
    let mut sq_sum = 0.0;
    for s in lo..hi {
        let x = inputs.row(s);
        let mut h = net.hidden_weights.matvec(x);
        for (a, b) in h.iter_mut().zip(&net.hidden_bias) {
            *a = (*a + b).tanh();
        }
        let mut e = net.output_weights.matvec(&h);
        for ((o, b), t) in e.iter_mut().zip(&net.output_bias).zip(targets.row(s)) {
            *o = *o + b - t;
        }
        sq_sum += dot(&e, &e);
    }
    sq_sum
}

/// Batch MSE for arbitrary multi-output targets.
pub fn mlp_batch_loss(net: &MlpNetwork, inputs: &Matrix, targets: &Matrix) -> Result<f64> {
    check_batch(net, inputs, targets)?;
    let n = inputs.rows();
    let ranges = chunk_ranges(n);
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = ranges
        .par_iter()
        .map(|&(lo, hi)| loss_chunk(net, inputs, targets, lo, hi))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = ranges
        .iter()
        .map(|&(lo, hi)| loss_chunk(net, inputs, targets, lo, hi))
        .collect();
    Ok(partials.iter().sum::<f64>() / n as f64)
}

/// Sequential reference implementation of [`mlp_batch_loss`].
pub fn mlp_batch_loss_seq(net: &MlpNetwork, inputs: &Matrix, targets: &Matrix) -> Result<f64> {
    check_batch(net, inputs, targets)?;
    let n = inputs.rows();
    let partials: Vec<f64> = chunk_ranges(n)
        .iter()
        .map(|&(lo, hi)| loss_chunk(net, inputs, targets, lo, hi))
        .collect();
    Ok(partials.iter().sum::<f64>() / n as f64)
}

fn targets_as_column(set: &SupervisedSet) -> Matrix {
    Matrix::from_vec(set.len(), 1, set.targets().to_vec()).expect("sized buffer")
}

/// Mean squared error of the network over a windowed data set.
pub fn mlp_loss(net: &MlpNetwork, data: &SupervisedSet) -> Result<f64> {
    mlp_batch_loss(net, data.inputs(), &targets_as_column(data))
}

/// Loss and exact full-batch gradient over a windowed data set.
pub fn mlp_gradient(net: &MlpNetwork, data: &SupervisedSet) -> Result<(f64, MlpGradient)> {
    mlp_batch_gradient(net, data.inputs(), &targets_as_column(data))
}

/// Sequential reference twin of [`mlp_gradient`].
pub fn mlp_gradient_seq(net: &MlpNetwork, data: &SupervisedSet) -> Result<(f64, MlpGradient)> {
    mlp_batch_gradient_seq(net, data.inputs(), &targets_as_column(data))
}

/// Sequential reference twin of [`mlp_loss`].
pub fn mlp_loss_seq(net: &MlpNetwork, data: &SupervisedSet) -> Result<f64> {
    mlp_batch_loss_seq(net, data.inputs(), &targets_as_column(data))
}
