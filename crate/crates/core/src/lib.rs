//! Anomaly detection for multivariate time series with a bidirectional
//! LSTM autoencoder.
//!
//! The pipeline: slide fixed-length windows over a scaled series, train a
//! sequence autoencoder on normal windows only, score every window by its
//! reconstruction error, and flag windows whose error exceeds a threshold
//! estimated from the training error distribution.
//!
//! Everything is deterministic given a seed: weight init, shuffling, and
//! synthetic data all draw from the same small explicit RNG, so runs are
//! reproducible bit for bit.

pub mod data;
pub mod detect;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod lstm;
pub mod model;
pub mod train;

pub use error::{Error, Result};
