//! Global extended Kalman filter training for the recurrent network,
//! generalized to several parallel streams sharing one weight vector.
//!
//! The network weights are treated as the state of a noisy dynamical
//! system observed through the network outputs. Each step stacks one
//! Jacobian column and one residual per stream and applies a single joint
//! update:
//!
//! ```text
//! A  = (η⁻¹·I + Hᵀ·P·H)⁻¹
//! K  = P·H·A
//! w' = w + K·r
//! P' = P − K·Hᵀ·P + q·I      (then re-symmetrized)
//! ```
//!
//! `H` is `n_w × m` with column `j` holding ∂y_j/∂w in the canonical
//! weight enumeration, and `r_j = target_j − y_j`. Several streams per
//! update counteract the recency effect: no single segment of the series
//! can drag the shared weights around on its own.

use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::elman::{elman_step, ElmanNetwork, HiddenState, StepRecord, StreamBuffer};
use crate::elman::tbptt_jacobian;
use crate::error::{Error, Result};
use crate::linalg::{axpy, cholesky, dot, Matrix};
use crate::preprocess::NormalizedSeries;
use crate::rng::{derive_seed, Rng};
use crate::training::{StopReason, TrainingReport};

/// Default initial covariance scale: P₀ = 100·I.
pub const DEFAULT_INITIAL_COVARIANCE: f64 = 100.0;
/// Default learning rate η entering the innovation as η⁻¹·I.
pub const DEFAULT_LEARNING_RATE: f64 = 0.5;
/// Default process noise q, added as q·I to keep P from collapsing.
pub const DEFAULT_PROCESS_NOISE: f64 = 1e-6;

/// Pivot tolerance for the m×m innovation solve; a pivot at or below this
/// aborts the update instead of corrupting the covariance.
const INNOVATION_PIVOT_TOL: f64 = 1e-12;

/// Filter state shared across all streams: weight covariance plus the
/// scalar hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    covariance: Matrix,
    learning_rate: f64,
    process_noise: f64,
    step: u64,
}

impl EkfState {
    /// Fresh state with `P = p0·I` over `n_weights` weights.
    pub fn new(n_weights: usize, p0: f64, learning_rate: f64, process_noise: f64) -> Result<Self> {
        if n_weights == 0 {
            return Err(Error::Domain("filter needs at least one weight".into()));
        }
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::Domain(format!(
                "initial covariance scale must be finite and > 0, got {p0}"
            )));
        }
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "learning rate must be finite and > 0, got {learning_rate}"
            )));
        }
        if !(process_noise >= 0.0 && process_noise.is_finite()) {
            return Err(Error::Domain(format!(
                "process noise must be finite and >= 0, got {process_noise}"
            )));
        }
        Ok(EkfState {
            covariance: Matrix::scaled_identity(n_weights, p0),
            learning_rate,
            process_noise,
            step: 0,
        })
    }

    /// State with the reference hyperparameters (P₀ = 100·I, η = 0.5,
    /// q = 1e−6).
    pub fn with_defaults(n_weights: usize) -> Result<Self> {
        EkfState::new(
            n_weights,
            DEFAULT_INITIAL_COVARIANCE,
            DEFAULT_LEARNING_RATE,
            DEFAULT_PROCESS_NOISE,
        )
    }

    pub fn n_weights(&self) -> usize {
        self.covariance.rows()
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn process_noise(&self) -> f64 {
        self.process_noise
    }

    /// Number of joint updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Multistream training schedule. `seed` drives both stream placement and
/// nothing else — network initialization is the caller's business.
#[derive(Debug, Clone, PartialEq)]
pub struct MultistreamConfig {
    /// Number of parallel streams N_s.
    pub n_streams: usize,
    /// Points per stream segment.
    pub stream_length: usize,
    /// Backpropagation-through-time truncation depth.
    pub tbptt_window: usize,
    /// Master seed for stream placement.
    pub seed: u64,
    /// Epoch budget.
    pub epochs: usize,
    /// Stop once the epoch MSE reaches this level.
    pub target_mse: f64,
    /// When true (the default), stream starts are redrawn every epoch from
    /// a per-epoch seed derived from `seed`; when false, the plan drawn
    /// from `seed` itself is reused for the whole run.
    pub resample_per_epoch: bool,
}

impl Default for MultistreamConfig {
    fn default() -> Self {
        MultistreamConfig {
            n_streams: 20,
            stream_length: 200,
            tbptt_window: 20,
            seed: 0,
            epochs: 50,
            target_mse: 1e-4,
            resample_per_epoch: true,
        }
    }
}

impl MultistreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_streams == 0 {
            return Err(Error::Domain("need at least one stream".into()));
        }
        if self.tbptt_window == 0 {
            return Err(Error::Domain("truncation window must be at least 1".into()));
        }
        if self.stream_length <= self.tbptt_window {
            return Err(Error::Domain(format!(
                "stream length {} must exceed the truncation window {}",
                self.stream_length, self.tbptt_window
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Domain("epoch budget must be at least 1".into()));
        }
        if !(self.target_mse > 0.0 && self.target_mse.is_finite()) {
            return Err(Error::Domain(format!(
                "target MSE must be finite and > 0, got {}",
                self.target_mse
            )));
        }
        Ok(())
    }
}

/// Where each stream's segment begins in the training series.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamPlan {
    starts: Vec<usize>,
}

impl StreamPlan {
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn n_streams(&self) -> usize {
        self.starts.len()
    }
}

/// Draws `n_streams` segment starts uniformly (with replacement) from
/// `[0, n_train − stream_length]`, deterministically from `config.seed`.
/// Overlapping segments are allowed — disjoint partitioning could not
/// honor the reference stream length on a series of this size.
pub fn sample_streams(n_train: usize, config: &MultistreamConfig) -> Result<StreamPlan> {
    config.validate()?;
    if n_train < config.stream_length {
        return Err(Error::Domain(format!(
            "training series has {} points, streams need {}",
            n_train, config.stream_length
        )));
    }
    let span = n_train - config.stream_length;
    let mut rng = Rng::from_seed(config.seed);
    let starts = (0..config.n_streams).map(|_| rng.index(span + 1)).collect();
    Ok(StreamPlan { starts })
}

/// `P·H` with rows computed independently (and in parallel when enabled):
/// row `k` holds `dot(P.row(k), H.col(j))` for each stream `j`. `ht` is
/// `Hᵀ`, handed over so both factors are walked along contiguous rows.
fn pht(p: &Matrix, ht: &Matrix) -> Matrix {
    let n_w = p.rows();
    let m = ht.rows();
    let mut out = Matrix::zeros(n_w, m);
    #[cfg(feature = "parallel")]
    {
        out.as_mut_slice()
            .par_chunks_mut(m)
            .enumerate()
            .for_each(|(k, row)| pht_row(p, ht, k, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for k in 0..n_w {
            pht_row(p, ht, k, out.row_mut(k));
        }
    }
    out
}

/// Sequential twin of [`pht`], compiled unconditionally for benchmarks.
fn pht_seq(p: &Matrix, ht: &Matrix) -> Matrix {
    let n_w = p.rows();
    let m = ht.rows();
    let mut out = Matrix::zeros(n_w, m);
    for k in 0..n_w {
        pht_row(p, ht, k, out.row_mut(k));
    }
    out
}

fn pht_row(p: &Matrix, ht: &Matrix, k: usize, row: &mut [f64]) {
    for (j, slot) in row.iter_mut().enumerate() {
        *slot = dot(p.row(k), ht.row(j));
    }
}

/// `P ← P − Xᵀ·B` row by row; row `i` subtracts `Σ_j X[j][i]·B.row(j)`.
/// Rows are independent, so this runs in parallel when enabled.
fn subtract_gain_term(p: &mut Matrix, x: &Matrix, b: &Matrix) {
    let n_w = p.rows();
    #[cfg(feature = "parallel")]
    {
        p.as_mut_slice()
            .par_chunks_mut(n_w)
            .enumerate()
            .for_each(|(i, row)| subtract_gain_row(x, b, i, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for i in 0..n_w {
            subtract_gain_row(x, b, i, p.row_mut(i));
        }
    }
}

/// Sequential twin of [`subtract_gain_term`], compiled unconditionally for
/// benchmarks.
fn subtract_gain_term_seq(p: &mut Matrix, x: &Matrix, b: &Matrix) {
    let n_w = p.rows();
    for i in 0..n_w {
        subtract_gain_row(x, b, i, p.row_mut(i));
    }
}

fn subtract_gain_row(x: &Matrix, b: &Matrix, i: usize, row: &mut [f64]) {
    for j in 0..x.rows() {
        axpy(row, b.row(j), -x.get(j, i));
    }
}

fn ekf_update_impl(
    weights: &[f64],
    ekf: &mut EkfState,
    h: &Matrix,
    residuals: &[f64],
    ph: fn(&Matrix, &Matrix) -> Matrix,
    subtract: fn(&mut Matrix, &Matrix, &Matrix),
) -> Result<Vec<f64>> {
    let n_w = ekf.n_weights();
    let m = residuals.len();
    if weights.len() != n_w {
        return Err(Error::Shape(format!(
            "weight vector has {} entries, filter tracks {n_w}",
            weights.len()
        )));
    }
    if h.rows() != n_w || h.cols() != m {
        return Err(Error::Shape(format!(
            "Jacobian is {}x{}, expected {n_w}x{m}",
            h.rows(),
            h.cols()
        )));
    }
    if m == 0 {
        return Err(Error::Shape("update needs at least one residual".into()));
    }

    // Hᵀ up front: every inner product below then runs along contiguous
    // rows of its operands.
    let ht = h.transposed();

    // B = Hᵀ·P as its transpose Bt = P·H (P is symmetric), rows in
    // parallel; then flipped so stream-indexed rows are contiguous too.
    let bt = ph(&ekf.covariance, &ht);
    let b = bt.transposed();

    // Innovation S = η⁻¹·I + Hᵀ·P·H, symmetric m×m.
    let mut s = Matrix::zeros(m, m);
    let eta_inv = 1.0 / ekf.learning_rate;
    for j in 0..m {
        for l in 0..m {
            let v = dot(b.row(j), ht.row(l)) + if j == l { eta_inv } else { 0.0 };
            s.set(j, l, v);
        }
    }
    let l_factor = cholesky(&s, INNOVATION_PIVOT_TOL)?;

    // X = S⁻¹·B by row-wise forward/backward substitution, so that
    // K = P·H·S⁻¹ = Xᵀ never has to be materialized.
    let mut x = b.clone();
    for i in 0..m {
        let mut row = x.row(i).to_vec();
        for k in 0..i {
            axpy(&mut row, x.row(k), -l_factor.get(i, k));
        }
        let inv = 1.0 / l_factor.get(i, i);
        for v in row.iter_mut() {
            *v *= inv;
        }
        x.row_mut(i).copy_from_slice(&row);
    }
    for i in (0..m).rev() {
        let mut row = x.row(i).to_vec();
        for k in (i + 1)..m {
            axpy(&mut row, x.row(k), -l_factor.get(k, i));
        }
        let inv = 1.0 / l_factor.get(i, i);
        for v in row.iter_mut() {
            *v *= inv;
        }
        x.row_mut(i).copy_from_slice(&row);
    }

    // w' = w + K·r accumulated stream by stream.
    let mut new_weights = weights.to_vec();
    for (j, &r) in residuals.iter().enumerate() {
        axpy(&mut new_weights, x.row(j), r);
    }

    // P' = P − K·Hᵀ·P + q·I, re-symmetrized.
    subtract(&mut ekf.covariance, &x, &b);
    ekf.covariance.add_diag(ekf.process_noise);
    ekf.covariance.symmetrize();
    ekf.step += 1;
    Ok(new_weights)
}

/// One joint filter update over `m` stream observations. Returns the
/// updated weights; the covariance and step counter advance in place.
/// Fails with a numeric error (covariance untouched) if the innovation
/// system is singular beyond tolerance.
pub fn ekf_update(
    weights: &[f64],
    ekf: &mut EkfState,
    h: &Matrix,
    residuals: &[f64],
) -> Result<Vec<f64>> {
    ekf_update_impl(weights, ekf, h, residuals, pht, subtract_gain_term)
}

/// Sequential twin of [`ekf_update`]: bitwise-identical results, no
/// thread pool. Exists so the benchmark suite can price the parallelism.
pub fn ekf_update_seq(
    weights: &[f64],
    ekf: &mut EkfState,
    h: &Matrix,
    residuals: &[f64],
) -> Result<Vec<f64>> {
    ekf_update_impl(weights, ekf, h, residuals, pht_seq, subtract_gain_term_seq)
}

/// Per-stream mutable context threaded through an epoch.
struct StreamWork {
    start: usize,
    state: HiddenState,
    buffer: StreamBuffer,
}

fn advance_stream(
    net: &ElmanNetwork,
    values: &[f64],
    work: &mut StreamWork,
    step: usize,
    tbptt_window: usize,
) -> Result<(f64, Vec<f64>)> {
    let lo = work.start + step;
    let input = &values[lo..lo + net.n_in()];
    let target = values[lo + net.n_in()];
    let (y, h_new) = elman_step(net, &work.state, input)?;
    work.buffer.push(StepRecord {
        input: input.to_vec(),
        h_prev: work.state.values().to_vec(),
        h_new: h_new.values().to_vec(),
    });
    let jac = tbptt_jacobian(net, &work.buffer, tbptt_window)?;
    work.state = h_new;
    Ok((target - y, jac))
}

/// Trains the recurrent network with the multistream filter.
///
/// Every epoch lays `n_streams` segments over the training series (redrawn
/// per epoch unless `resample_per_epoch` is off), resets each stream's
/// hidden state, and walks all streams in lockstep: one forward step and
/// one truncated-BPTT Jacobian per stream — independent, evaluated
/// concurrently — then exactly one joint weight update. Stream index fixes
/// the Jacobian column order, so results are schedule-independent and the
/// whole run is deterministic for a given (seed, config, data, network,
/// filter) tuple.
///
/// The epoch error is the MSE over every residual the epoch produced;
/// residuals are measured against the weights as they evolve within the
/// epoch, as usual for online filtering.
pub fn train_elman_multistream(
    net: &ElmanNetwork,
    train: &NormalizedSeries,
    config: &MultistreamConfig,
    mut ekf: EkfState,
) -> Result<(ElmanNetwork, TrainingReport)> {
    config.validate()?;
    let n_in = net.n_in();
    let n_hidden = net.n_hidden();
    if config.stream_length <= n_in {
        return Err(Error::Domain(format!(
            "stream length {} leaves no room after the {n_in}-wide input window",
            config.stream_length
        )));
    }
    if ekf.n_weights() != net.weight_count() {
        return Err(Error::Shape(format!(
            "filter tracks {} weights, network has {}",
            ekf.n_weights(),
            net.weight_count()
        )));
    }
    let values = train.values();
    let fixed_plan = if config.resample_per_epoch {
        None
    } else {
        Some(sample_streams(values.len(), config)?)
    };

    let clock = Instant::now();
    let m = config.n_streams;
    let steps = config.stream_length - n_in;
    let n_w = net.weight_count();
    let mut cur = net.clone();
    let mut curve = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;

    'epochs: for epoch in 0..config.epochs {
        let plan = match &fixed_plan {
            Some(p) => p.clone(),
            None => {
                let mut epoch_cfg = config.clone();
                epoch_cfg.seed = derive_seed(config.seed, epoch as u64);
                sample_streams(values.len(), &epoch_cfg)?
            }
        };
        let mut streams: Vec<StreamWork> = plan
            .starts()
            .iter()
            .map(|&start| {
                Ok(StreamWork {
                    start,
                    state: HiddenState::zero(n_hidden),
                    buffer: StreamBuffer::new(config.tbptt_window)?,
                })
            })
            .collect::<Result<_>>()?;

        let mut sq_sum = 0.0;
        for s in 0..steps {
            #[cfg(feature = "parallel")]
            let evaluated: Vec<Result<(f64, Vec<f64>)>> = streams
                .par_iter_mut()
                .map(|w| advance_stream(&cur, values, w, s, config.tbptt_window))
                .collect();
            #[cfg(not(feature = "parallel"))]
            let evaluated: Vec<Result<(f64, Vec<f64>)>> = streams
                .iter_mut()
                .map(|w| advance_stream(&cur, values, w, s, config.tbptt_window))
                .collect();

            let mut h = Matrix::zeros(n_w, m);
            let mut residuals = Vec::with_capacity(m);
            for (j, item) in evaluated.into_iter().enumerate() {
                let (r, jac) = item?;
                residuals.push(r);
                for (k, &g) in jac.iter().enumerate() {
                    h.set(k, j, g);
                }
            }
            sq_sum += residuals.iter().map(|r| r * r).sum::<f64>();

            let new_weights = ekf_update(&cur.to_weight_vec(), &mut ekf, &h, &residuals)?;
            if new_weights.iter().any(|v| !v.is_finite()) {
                curve.push(sq_sum / ((m * (s + 1)) as f64));
                stop_reason = StopReason::Diverged;
                break 'epochs;
            }
            cur = ElmanNetwork::from_weight_vec(n_in, n_hidden, &new_weights)?;
        }

        let epoch_mse = sq_sum / ((m * steps) as f64);
        curve.push(epoch_mse);
        if !epoch_mse.is_finite() || !ekf.covariance.all_finite() {
            stop_reason = StopReason::Diverged;
            break;
        }
        if epoch_mse <= config.target_mse {
            stop_reason = StopReason::TargetReached;
            break;
        }
    }

    let report = TrainingReport {
        epochs_run: curve.len(),
        error_curve: curve,
        stop_reason,
        wall_time: clock.elapsed().as_secs_f64(),
    };
    Ok((cur, report))
}
