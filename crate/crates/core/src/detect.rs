//! Anomaly decisions from reconstruction error: score windows with a
//! trained model, pick a threshold from the training-loss distribution,
//! and flag windows whose loss strictly exceeds it.

use std::fmt;
use std::str::FromStr;

use crate::data::WindowBatch;
use crate::error::{Error, Result};
use crate::model::{mae_loss, ModelParams};

/// How the decision threshold is derived from anomaly-free training
/// losses. The distribution of normal reconstruction errors is what the
/// model was fitted to; anomalies land in its upper tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdStrategy {
    /// Linear-interpolation quantile of the training losses, `q` in (0,1].
    Quantile(f64),
    /// Largest training loss.
    Max,
    /// `mean + k * std` of the training losses, `k >= 0`.
    MeanPlusKStd(f64),
    /// A caller-supplied threshold, passed through unchanged.
    Fixed(f64),
}

impl ThresholdStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdStrategy::Quantile(q) => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "quantile must be in (0,1], got {q}"
                    )));
                }
            }
            ThresholdStrategy::MeanPlusKStd(k) => {
                if !(k >= 0.0 && k.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "mean_plus_k_std needs k >= 0, got {k}"
                    )));
                }
            }
            ThresholdStrategy::Fixed(eta) => {
                if !eta.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "fixed threshold must be finite, got {eta}"
                    )));
                }
            }
            ThresholdStrategy::Max => {}
        }
        Ok(())
    }
}

impl Default for ThresholdStrategy {
    fn default() -> Self {
        ThresholdStrategy::Quantile(0.99)
    }
}

impl fmt::Display for ThresholdStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdStrategy::Quantile(q) => write!(f, "quantile:{q}"),
            ThresholdStrategy::Max => write!(f, "max"),
            ThresholdStrategy::MeanPlusKStd(k) => write!(f, "mean_plus_k_std:{k}"),
            ThresholdStrategy::Fixed(eta) => write!(f, "fixed:{eta}"),
        }
    }
}

impl FromStr for ThresholdStrategy {
    type Err = Error;

    /// Accepts `max`, `quantile:Q`, `mean_plus_k_std:K`, and `fixed:V`.
    fn from_str(s: &str) -> Result<Self> {
        let strategy = match s.split_once(':') {
            None if s == "max" => ThresholdStrategy::Max,
            Some(("quantile", q)) => ThresholdStrategy::Quantile(parse_param("quantile", q)?),
            Some(("mean_plus_k_std", k)) => {
                ThresholdStrategy::MeanPlusKStd(parse_param("mean_plus_k_std", k)?)
            }
            Some(("fixed", eta)) => ThresholdStrategy::Fixed(parse_param("fixed", eta)?),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown threshold strategy {s:?}; expected max, quantile:Q, \
                     mean_plus_k_std:K, or fixed:V"
                )))
            }
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

fn parse_param(kind: &str, raw: &str) -> Result<f64> {
    raw.parse()
        .map_err(|_| Error::InvalidArgument(format!("{kind} parameter {raw:?} is not a number")))
}

/// Reconstruction loss of every window in the batch, in order.
/// Bit-identical to scoring the windows one at a time.
pub fn score(model: &ModelParams, windows: &WindowBatch) -> Result<Vec<f64>> {
    let mut losses = Vec::with_capacity(windows.len());
    for i in 0..windows.len() {
        let w = windows.window(i);
        let (out, _) = model.forward(&w)?;
        losses.push(mae_loss(&out, &w)?);
    }
    Ok(losses)
}

/// Derives the decision threshold from anomaly-free training losses.
pub fn estimate_threshold(train_losses: &[f64], strategy: ThresholdStrategy) -> Result<f64> {
    strategy.validate()?;
    if train_losses.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot estimate a threshold from zero losses".into(),
        ));
    }
    if train_losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument(
            "training losses contain a non-finite value".into(),
        ));
    }
    Ok(match strategy {
        ThresholdStrategy::Fixed(eta) => eta,
        ThresholdStrategy::Max => train_losses.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ThresholdStrategy::MeanPlusKStd(k) => {
            let n = train_losses.len() as f64;
            let mean = train_losses.iter().sum::<f64>() / n;
            let var = train_losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
            mean + k * var.sqrt()
        }
        ThresholdStrategy::Quantile(q) => {
            let mut sorted = train_losses.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite losses"));
            // Position q*(n-1) between order statistics, interpolated.
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
    })
}

/// Scored windows with their decisions. Invariant:
/// `flags[i] == (losses[i] > threshold)` — ties classify as normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub losses: Vec<f64>,
    pub threshold: f64,
    /// 1 = flagged anomalous.
    pub flags: Vec<u8>,
    pub window_end_indices: Vec<usize>,
}

/// Applies the strict-inequality decision rule to every loss.
pub fn classify(
    losses: Vec<f64>,
    threshold: f64,
    window_end_indices: Vec<usize>,
) -> Result<ReconstructionReport> {
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold must be finite, got {threshold}"
        )));
    }
    if losses.len() != window_end_indices.len() {
        return Err(Error::shape(
            "classify",
            format!(
                "{} losses but {} window end indices",
                losses.len(),
                window_end_indices.len()
            ),
        ));
    }
    if let Some(bad) = losses.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "losses must be finite and nonnegative, got {bad}"
        )));
    }
    let flags = losses
        .iter()
        .map(|&l| u8::from(l > threshold))
        .collect();
    Ok(ReconstructionReport {
        losses,
        threshold,
        flags,
        window_end_indices,
    })
}

impl ReconstructionReport {
    pub fn anomaly_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f == 1).count()
    }

    /// `window_end_index,loss,flag` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_end_index,loss,flag\n");
        for ((end, loss), flag) in self
            .window_end_indices
            .iter()
            .zip(&self.losses)
            .zip(&self.flags)
        {
            out.push_str(&format!("{end},{loss},{flag}\n"));
        }
        out
    }
}
