//! Shared pipeline plumbing: the split/scale/window preparation that
//! `train` and `detect` must perform identically, parallel window
//! scoring, and reading report CSVs back in for `eval` and `compare`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use tsad_core::data::{
    apply_scaler, fit_scaler, make_windows, split_and_filter, ScalerMode, ScalerParams,
    SplitCounts, TimeSeriesFrame, WindowBatch,
};
use tsad_core::detect::ReconstructionReport;
use tsad_core::model::{mae_loss, ModelParams};

/// Everything the model-facing commands derive from a raw frame. The
/// scaler is fitted on the anomaly-filtered training rows only and then
/// applied to both sides, so `detect` reproduces exactly what `train`
/// saw by re-running this function with the same flags.
pub struct PreparedData {
    pub counts: SplitCounts,
    pub scaler: ScalerParams,
    /// Scaled windows over the filtered training rows; labels all 0.
    pub train_windows: WindowBatch,
    /// Scaled windows over the untouched test rows; labels carried.
    pub test_windows: WindowBatch,
}

pub fn prepare(
    frame: &TimeSeriesFrame,
    train_ratio: f64,
    scaler_mode: ScalerMode,
    lookback: usize,
) -> Result<PreparedData> {
    let split = split_and_filter(frame, train_ratio, lookback).context("splitting data")?;
    let scaler = fit_scaler(&split.train, scaler_mode).context("fitting scaler")?;
    let train_scaled = apply_scaler(&split.train, &scaler);
    let test_scaled = apply_scaler(&split.test, &scaler);
    let train_windows = make_windows(&train_scaled, lookback).context("windowing train rows")?;
    let test_windows = make_windows(&test_scaled, lookback).context("windowing test rows")?;
    Ok(PreparedData {
        counts: split.counts,
        scaler,
        train_windows,
        test_windows,
    })
}

/// Reconstruction loss of every window, fanned out over `threads`.
///
/// Each window's loss is computed independently and written back at its
/// own index, so the result is bit-identical for any thread count.
pub fn score_windows(
    model: &ModelParams,
    windows: &WindowBatch,
    threads: usize,
) -> Result<Vec<f64>> {
    let n = windows.len();
    let loss_of = |i: usize| -> Result<f64> {
        let w = windows.window(i);
        let (out, _) = model.forward(&w)?;
        Ok(mae_loss(&out, &w)?)
    };
    if threads <= 1 || n < 2 {
        return (0..n).map(loss_of).collect();
    }
    let chunk = n.div_ceil(threads);
    let ranges: Vec<_> = (0..n)
        .step_by(chunk)
        .map(|start| start..(start + chunk).min(n))
        .collect();
    std::thread::scope(|scope| {
        let workers: Vec<_> = ranges
            .into_iter()
            .map(|range| scope.spawn(move || range.map(loss_of).collect::<Result<Vec<_>>>()))
            .collect();
        let mut losses = Vec::with_capacity(n);
        for worker in workers {
            let part = worker
                .join()
                .map_err(|_| anyhow::anyhow!("scoring worker panicked"))??;
            losses.extend(part);
        }
        Ok(losses)
    })
}

/// Parses a `window_end_index,loss,flag` CSV written by `detect` back
/// into a report. The decision threshold is not stored in the CSV, so
/// the reconstructed report carries NaN there; evaluation only needs
/// the losses, flags, and indices.
pub fn read_report_csv(path: &Path) -> Result<ReconstructionReport> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading report {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("window_end_index,loss,flag") => {}
        Some(other) => bail!(
            "report {}: expected header \"window_end_index,loss,flag\", got {other:?}",
            path.display()
        ),
        None => bail!("report {} is empty", path.display()),
    }
    let mut window_end_indices = Vec::new();
    let mut losses = Vec::new();
    let mut flags = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (a, b, c) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => bail!(
                "report {} line {}: expected 3 fields, got {line:?}",
                path.display(),
                lineno + 2
            ),
        };
        let parse_ctx = || {
            format!(
                "report {} line {}: bad value in {line:?}",
                path.display(),
                lineno + 2
            )
        };
        window_end_indices.push(a.parse::<usize>().with_context(parse_ctx)?);
        losses.push(b.parse::<f64>().with_context(parse_ctx)?);
        let flag = c.parse::<u8>().with_context(parse_ctx)?;
        if flag > 1 {
            bail!(
                "report {} line {}: flag must be 0 or 1, got {flag}",
                path.display(),
                lineno + 2
            );
        }
        flags.push(flag);
    }
    if window_end_indices.is_empty() {
        bail!("report {} has a header but no rows", path.display());
    }
    Ok(ReconstructionReport {
        losses,
        threshold: f64::NAN,
        flags,
        window_end_indices,
    })
}

/// Ground-truth labels for the windows a report covers: the label of
/// each window's final row, read from the test portion of `frame` under
/// the same chronological split the detector used.
pub fn truth_for_report(
    frame: &TimeSeriesFrame,
    train_ratio: f64,
    report: &ReconstructionReport,
) -> Result<Vec<u8>> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        bail!("train_ratio must be in (0,1), got {train_ratio}");
    }
    let cut = (frame.len() as f64 * train_ratio).floor() as usize;
    let test = frame.slice(cut, frame.len());
    report
        .window_end_indices
        .iter()
        .map(|&end| {
            test.labels.get(end).copied().ok_or_else(|| {
                anyhow::anyhow!(
                    "report references test row {end} but the test split has only {} rows \
                     — was the report produced from this data and train ratio?",
                    test.len()
                )
            })
        })
        .collect()
}
