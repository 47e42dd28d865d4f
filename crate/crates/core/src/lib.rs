//! Neural forecasting for daily exchange-rate series, built from first
//! principles.
//!
//! The pipeline: raw rates become log returns, returns are squashed into
//! (0, 1) with a logistic map, and sliding windows of the squashed values
//! feed one of two small networks — a feedforward net trained with
//! backpropagation or the RPROP family, or an Elman recurrent net trained
//! with a multistream extended Kalman filter on truncated-BPTT
//! derivatives. Evaluation maps forecasts back to rate space.
//!
//! Everything numeric is written in-repo over plain `f64` buffers with
//! fixed summation orders, so a run is reproducible bit for bit from its
//! seed — including under the data-parallel code paths, which are gated
//! behind the `parallel` feature (on by default) and split work into
//! fixed-size chunks combined in a fixed order.

pub mod data;
pub mod ekf;
pub mod elman;
pub mod error;
pub mod evaluate;
pub mod linalg;
pub mod mlp;
pub mod preprocess;
pub mod rng;
pub mod rprop;
pub mod training;

pub use error::{Error, Result};

/// Calendar type used for series timestamps, re-exported so downstream
/// crates need not depend on `chrono` directly.
pub use chrono::NaiveDate as Date;
