//! Mini-batch training of the autoencoder with Adam, plus a
//! finite-difference gradient checker for the hand-derived backward
//! passes.
//!
//! Training is deterministic end to end: epoch shuffles are a pure
//! function of (seed, epoch), batches reduce in index order, and the
//! optimizer owns a single flat state vector aligned with
//! [`ModelParams::flatten`].

use std::path::Path;

use crate::data::WindowBatch;
use crate::error::{Error, Result};
use crate::linalg::Rng;
use crate::model::{mae_loss, ModelParams};

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Fraction of the training windows held out, from the end in time
    /// order, for the per-epoch validation loss.
    pub validation_fraction: f64,
    /// Seeds the epoch shuffles.
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global-norm gradient clip; 0 disables clipping.
    pub clip_norm: f64,
    /// Stop after this many epochs without validation improvement.
    /// `None` (the default) always runs every epoch.
    pub patience: Option<usize>,
    /// Worker threads for per-batch gradient computation. Results reduce
    /// in a fixed chunk order, so runs are bit-identical for a given
    /// thread count; the default of 1 makes them identical across
    /// machines regardless.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.0001,
            batch_size: 128,
            epochs: 50,
            validation_fraction: 0.1,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 5.0,
            patience: None,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "validation_fraction must be in (0,1), got {}",
                self.validation_fraction
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in (0,1), got {b}"
                )));
            }
        }
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument("epsilon must be > 0".into()));
        }
        if self.clip_norm < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "clip_norm must be >= 0 (0 disables), got {}",
                self.clip_norm
            )));
        }
        if self.threads < 1 {
            return Err(Error::InvalidArgument("threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// Adam's per-parameter moment accumulators, flat and aligned with
/// [`ModelParams::flatten`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::shape(
            "adam_step",
            format!(
                "{} params, {} grads, {} state entries",
                params.len(),
                grads.len(),
                state.m.len()
            ),
        ));
    }
    if let Some(bad) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Training(format!(
            "non-finite gradient at flat index {bad}"
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    // Bias corrections counteract the zero-initialized moments.
    let corr1 = 1.0 - cfg.beta1.powi(t);
    let corr2 = 1.0 - cfg.beta2.powi(t);
    for k in 0..params.len() {
        let g = grads[k];
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
        state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[k] / corr1;
        let v_hat = state.v[k] / corr2;
        params[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

/// Scales `grads` so their Euclidean norm is at most `max_norm`
/// (`max_norm == 0` disables). Returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

/// Loss trajectories, one entry per completed epoch. When the window set
/// is too small to carve a validation split, validation entries are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurves {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

impl LearningCurves {
    /// `epoch,train_loss,val_loss` with 1-based epochs.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for (i, (tr, va)) in self.train_loss.iter().zip(&self.val_loss).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, tr, va));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// The deterministic shuffle order for one epoch: Fisher-Yates driven by
/// a generator seeded from (seed, epoch) only.
fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = Rng::new(seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        order.swap(i, j);
    }
    order
}

fn mean_loss(model: &ModelParams, batch: &WindowBatch, indices: Option<&[usize]>) -> Result<f64> {
    let eval = |i: usize| -> Result<f64> {
        let w = batch.window(i);
        let (out, _) = model.forward(&w)?;
        mae_loss(&out, &w)
    };
    let (sum, count) = match indices {
        Some(idx) => {
            let mut s = 0.0;
            for &i in idx {
                s += eval(i)?;
            }
            (s, idx.len())
        }
        None => {
            let mut s = 0.0;
            for i in 0..batch.len() {
                s += eval(i)?;
            }
            (s, batch.len())
        }
    };
    Ok(sum / count as f64)
}

/// Trains in place on anomaly-free windows and reports per-epoch losses.
///
/// Every window must be normal (label 0): feeding the reconstruction
/// objective anomalies would teach it to reproduce them. The last
/// `validation_fraction` of the windows, in time order, is held out; the
/// rest is shuffled each epoch, batched, and stepped with Adam. Both
/// recorded losses are recomputed at epoch end over the full respective
/// sets, so curves are comparable across batch sizes.
pub fn fit(
    model: &mut ModelParams,
    train_windows: &WindowBatch,
    cfg: &TrainConfig,
) -> Result<LearningCurves> {
    cfg.validate()?;
    if train_windows.is_empty() {
        return Err(Error::InvalidArgument("no training windows".into()));
    }
    if let Some(bad) = train_windows.labels().iter().position(|&l| l != 0) {
        return Err(Error::Training(format!(
            "training window {bad} is labeled anomalous; the model must train on normal data only"
        )));
    }
    if train_windows.lookback() != model.config.lookback
        || train_windows.features() != model.config.features
    {
        return Err(Error::shape(
            "fit",
            format!(
                "windows are {}x{}, model expects {}x{}",
                train_windows.lookback(),
                train_windows.features(),
                model.config.lookback,
                model.config.features
            ),
        ));
    }

    let n = train_windows.len();
    let n_val = (n as f64 * cfg.validation_fraction).floor() as usize;
    let (fit_set, val_set): (WindowBatch, Option<WindowBatch>) = if n_val > 0 && n_val < n {
        let (head, tail) = train_windows.split_tail(n_val)?;
        (head, Some(tail))
    } else {
        (train_windows.clone(), None)
    };

    let mut flat = model.flatten();
    let mut adam = AdamState::new(flat.len());
    let mut curves = LearningCurves {
        train_loss: Vec::with_capacity(cfg.epochs),
        val_loss: Vec::with_capacity(cfg.epochs),
    };
    let mut best_val = f64::INFINITY;
    let mut stale_epochs = 0usize;

    for epoch in 0..cfg.epochs {
        let order = epoch_order(fit_set.len(), cfg.seed, epoch);
        for chunk in order.chunks(cfg.batch_size) {
            let grads = batch_gradients(model, &fit_set, chunk, cfg.threads)?;
            let mut grad_flat = grads.flatten();
            let inv = 1.0 / chunk.len() as f64;
            for g in grad_flat.iter_mut() {
                *g *= inv;
            }
            clip_global_norm(&mut grad_flat, cfg.clip_norm);
            adam_step(&mut flat, &grad_flat, &mut adam, cfg)?;
            model.assign_from_flat(&flat)?;
        }

        let train_loss = mean_loss(model, &fit_set, None)?;
        let val_loss = match &val_set {
            Some(v) => mean_loss(model, v, None)?,
            None => f64::NAN,
        };
        if !train_loss.is_finite() {
            return Err(Error::Training(format!(
                "training loss became non-finite at epoch {}",
                epoch + 1
            )));
        }
        curves.train_loss.push(train_loss);
        curves.val_loss.push(val_loss);

        if let Some(patience) = cfg.patience {
            // Fall back to the training loss when there is no validation
            // split, so patience still means something.
            let watched = if val_loss.is_finite() { val_loss } else { train_loss };
            if watched < best_val {
                best_val = watched;
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
                if stale_epochs >= patience {
                    break;
                }
            }
        }
    }
    Ok(curves)
}

/// Sums reconstruction-loss gradients over the windows named by
/// `indices`. With more than one thread the index list is cut into
/// contiguous chunks, each summed on its own worker, and the partial
/// sums reduce in chunk order — so a given thread count always produces
/// the same bytes.
fn batch_gradients(
    model: &ModelParams,
    windows: &WindowBatch,
    indices: &[usize],
    threads: usize,
) -> Result<ModelParams> {
    let sum_over = |sub: &[usize]| -> Result<ModelParams> {
        let mut grads = model.zeros_like();
        for &i in sub {
            let w = windows.window(i);
            let (out, cache) = model.forward(&w)?;
            let g = model.backward(&w, &out, &cache)?;
            grads.accumulate(&g)?;
        }
        Ok(grads)
    };
    if threads <= 1 || indices.len() < 2 {
        return sum_over(indices);
    }
    let chunk_size = indices.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let workers: Vec<_> = indices
            .chunks(chunk_size)
            .map(|sub| scope.spawn(move || sum_over(sub)))
            .collect();
        let mut total = model.zeros_like();
        for worker in workers {
            let partial = worker
                .join()
                .map_err(|_| Error::Internal("gradient worker panicked".to_string()))??;
            total.accumulate(&partial)?;
        }
        Ok(total)
    })
}

/// Compares every analytic parameter gradient against central finite
/// differences and returns the maximum relative error,
/// `|a - n| / max(|a|, |n|, 1e-12)`.
///
/// The mean-absolute-error loss has a kink wherever an output entry
/// equals its target. Output entries within 1e-6 of the target at the
/// base point are masked out of the loss on both the analytic and the
/// numeric side, so the comparison never differentiates across a kink.
pub fn grad_check(model: &ModelParams, window: &[Vec<f64>], epsilon: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "grad_check epsilon must be in [1e-7, 1e-3], got {epsilon}"
        )));
    }
    let (base_out, cache) = model.forward(window)?;
    let mask: Vec<Vec<f64>> = base_out
        .iter()
        .zip(window)
        .map(|(o, t)| {
            o.iter()
                .zip(t)
                .map(|(a, b)| if (a - b).abs() < 1e-6 { 0.0 } else { 1.0 })
                .collect()
        })
        .collect();
    let n = (model.config.lookback * model.config.features) as f64;

    let masked_loss = |m: &ModelParams| -> Result<f64> {
        let (out, _) = m.forward(window)?;
        let sum: f64 = out
            .iter()
            .zip(window)
            .zip(&mask)
            .flat_map(|((o, t), mk)| {
                o.iter()
                    .zip(t)
                    .zip(mk)
                    .map(|((a, b), &keep)| keep * (a - b).abs())
            })
            .sum();
        Ok(sum / n)
    };

    let grad_out: Vec<Vec<f64>> = base_out
        .iter()
        .zip(window)
        .zip(&mask)
        .map(|((o, t), mk)| {
            o.iter()
                .zip(t)
                .zip(mk)
                .map(|((a, b), &keep)| keep * (a - b).signum() / n)
                .collect()
        })
        .collect();
    let analytic = model.backward_from_output_grad(&grad_out, &cache)?.flatten();

    let base = model.flatten();
    let mut probe = model.clone();
    let mut max_err = 0.0f64;
    let mut flat = base.clone();
    for k in 0..base.len() {
        flat[k] = base[k] + epsilon;
        probe.assign_from_flat(&flat)?;
        let plus = masked_loss(&probe)?;
        flat[k] = base[k] - epsilon;
        probe.assign_from_flat(&flat)?;
        let minus = masked_loss(&probe)?;
        flat[k] = base[k];
        let numeric = (plus - minus) / (2.0 * epsilon);
        let err = (analytic[k] - numeric).abs() / analytic[k].abs().max(numeric.abs()).max(1e-12);
        max_err = max_err.max(err);
    }
    Ok(max_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, make_windows, SynthConfig, WindowBatch};
    use crate::model::{build_model, ModelConfig};

    fn tiny_model_and_window() -> (ModelParams, Vec<Vec<f64>>) {
        let cfg = ModelConfig::new(3, 2, vec![2]);
        let model = build_model(&cfg, 5).unwrap();
        let mut rng = Rng::new(77);
        let window: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..2).map(|_| rng.uniform(0.0, 1.0)).collect())
            .collect();
        (model, window)
    }

    fn single_window_batch(window: &[Vec<f64>]) -> WindowBatch {
        WindowBatch::from_windows(vec![window.to_vec()], vec![0], vec![window.len() - 1]).unwrap()
    }

    fn clean_windows(rows: usize, lookback: usize, seed: u64) -> WindowBatch {
        let frame = generate_synthetic(
            &SynthConfig {
                rows,
                anomaly_fraction: 0.0,
                ..SynthConfig::default()
            },
            seed,
        )
        .unwrap();
        let scaler = crate::data::fit_scaler(&frame, crate::data::ScalerMode::MinMax).unwrap();
        let scaled = crate::data::apply_scaler(&frame, &scaler);
        make_windows(&scaled, lookback).unwrap()
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let ok = TrainConfig::default();
        ok.validate().unwrap();
        for bad in [
            TrainConfig { learning_rate: 0.0, ..ok.clone() },
            TrainConfig { batch_size: 0, ..ok.clone() },
            TrainConfig { epochs: 0, ..ok.clone() },
            TrainConfig { validation_fraction: 0.0, ..ok.clone() },
            TrainConfig { validation_fraction: 1.0, ..ok.clone() },
            TrainConfig { beta1: 1.0, ..ok.clone() },
            TrainConfig { beta2: 0.0, ..ok.clone() },
            TrainConfig { epsilon: 0.0, ..ok.clone() },
            TrainConfig { clip_norm: -1.0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn adam_zero_gradients_leave_params_unchanged() {
        let mut params = vec![1.0, -2.0, 0.5];
        let grads = vec![0.0; 3];
        let mut state = AdamState::new(3);
        let cfg = TrainConfig::default();
        adam_step(&mut params, &grads, &mut state, &cfg).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_first_step_closed_form() {
        // With fresh moments, bias correction cancels exactly and the
        // first update is -lr * g / (|g| + eps) per coordinate.
        let cfg = TrainConfig {
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let g = [0.3, -1.7, 4.0];
        let mut params = vec![0.0; 3];
        let mut state = AdamState::new(3);
        adam_step(&mut params, &g, &mut state, &cfg).unwrap();
        for k in 0..3 {
            let expect = -cfg.learning_rate * g[k] / (g[k].abs() + cfg.epsilon);
            assert!(
                (params[k] - expect).abs() < 1e-15,
                "coordinate {k}: {} vs {expect}",
                params[k]
            );
        }
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let mut params = vec![0.0];
        let mut state = AdamState::new(1);
        let cfg = TrainConfig::default();
        let err = adam_step(&mut params, &[f64::NAN], &mut state, &cfg).unwrap_err();
        assert!(matches!(err, Error::Training(_)));
    }

    #[test]
    fn adam_trajectories_are_deterministic() {
        let cfg = TrainConfig::default();
        let run = || {
            let mut params = vec![0.5, -0.25];
            let mut state = AdamState::new(2);
            for step in 1..=20 {
                let g = [0.1 * step as f64, -0.05];
                adam_step(&mut params, &g, &mut state, &cfg).unwrap();
            }
            (params, state)
        };
        let (p1, s1) = run();
        let (p2, s2) = run();
        assert_eq!(p1, p2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn clip_preserves_direction_and_caps_norm() {
        let mut g = vec![3.0, 4.0];
        let pre = clip_global_norm(&mut g, 1.0);
        assert!((pre - 5.0).abs() < 1e-15);
        assert!((g[0] - 0.6).abs() < 1e-15);
        assert!((g[1] - 0.8).abs() < 1e-15);

        let mut g = vec![3.0, 4.0];
        clip_global_norm(&mut g, 10.0);
        assert_eq!(g, vec![3.0, 4.0]);

        // 0 disables clipping entirely.
        let mut g = vec![300.0, 400.0];
        clip_global_norm(&mut g, 0.0);
        assert_eq!(g, vec![300.0, 400.0]);
    }

    #[test]
    fn epoch_order_is_pure_in_seed_and_epoch() {
        let a = epoch_order(100, 7, 3);
        let b = epoch_order(100, 7, 3);
        assert_eq!(a, b);
        assert_ne!(a, epoch_order(100, 7, 4));
        assert_ne!(a, epoch_order(100, 8, 3));
        // A permutation: sorted it recovers 0..n.
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn fit_rejects_anomalous_windows() {
        let (mut model, window) = tiny_model_and_window();
        let batch =
            WindowBatch::from_windows(vec![window.clone()], vec![1], vec![2]).unwrap();
        let err = fit(&mut model, &batch, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Training(_)));
    }

    #[test]
    fn fit_rejects_shape_mismatch() {
        let (mut model, _) = tiny_model_and_window();
        let batch = clean_windows(60, 10, 1); // lookback 10 != model's 3
        assert!(fit(&mut model, &batch, &TrainConfig::default()).is_err());
    }

    #[test]
    fn overfits_a_single_window() {
        let (mut model, window) = tiny_model_and_window();
        let batch = single_window_batch(&window);
        let cfg = TrainConfig {
            learning_rate: 0.01,
            batch_size: 1,
            epochs: 500,
            ..TrainConfig::default()
        };
        let curves = fit(&mut model, &batch, &cfg).unwrap();
        let last = *curves.train_loss.last().unwrap();
        assert!(last < 0.01, "final training loss {last}");
        // One window cannot spare a validation split.
        assert!(curves.val_loss.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn loss_descends_over_epochs() {
        let batch = clean_windows(2009, 10, 3); // 2000 windows
        let mut model = build_model(&ModelConfig::new(10, 4, vec![4, 2]), 11).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.005,
            batch_size: 64,
            epochs: 10,
            ..TrainConfig::default()
        };
        let curves = fit(&mut model, &batch, &cfg).unwrap();
        assert_eq!(curves.train_loss.len(), 10);
        assert!(
            curves.train_loss[9] < curves.train_loss[0],
            "loss went from {} to {}",
            curves.train_loss[0],
            curves.train_loss[9]
        );
        assert!(curves.val_loss.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn fit_is_deterministic_for_a_fixed_seed() {
        let batch = clean_windows(100, 8, 5);
        let cfg = TrainConfig {
            learning_rate: 0.01,
            batch_size: 16,
            epochs: 3,
            seed: 42,
            ..TrainConfig::default()
        };
        let mcfg = ModelConfig::new(8, 4, vec![3]);
        let mut m1 = build_model(&mcfg, 7).unwrap();
        let c1 = fit(&mut m1, &batch, &cfg).unwrap();
        let mut m2 = build_model(&mcfg, 7).unwrap();
        let c2 = fit(&mut m2, &batch, &cfg).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(m1.flatten(), m2.flatten());

        let mut m3 = build_model(&mcfg, 7).unwrap();
        let c3 = fit(&mut m3, &batch, &TrainConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(c1, c3);
    }

    #[test]
    fn threaded_fit_is_deterministic_and_close_to_serial() {
        let batch = clean_windows(100, 8, 5);
        let base = TrainConfig {
            learning_rate: 0.01,
            batch_size: 16,
            epochs: 3,
            seed: 42,
            ..TrainConfig::default()
        };
        let mcfg = ModelConfig::new(8, 4, vec![3]);

        // Two threads, run twice: bit-identical.
        let threaded = TrainConfig { threads: 2, ..base.clone() };
        let mut t1 = build_model(&mcfg, 7).unwrap();
        let ct1 = fit(&mut t1, &batch, &threaded).unwrap();
        let mut t2 = build_model(&mcfg, 7).unwrap();
        let ct2 = fit(&mut t2, &batch, &threaded).unwrap();
        assert_eq!(ct1, ct2);
        assert_eq!(t1.flatten(), t2.flatten());

        // Against one thread: the chunk-ordered reduction regroups f64
        // additions, so allow rounding-level drift but nothing more.
        let mut s = build_model(&mcfg, 7).unwrap();
        let cs = fit(&mut s, &batch, &base).unwrap();
        for (a, b) in cs.train_loss.iter().zip(&ct1.train_loss) {
            assert!((a - b).abs() < 1e-9, "serial {a} vs threaded {b}");
        }
    }

    #[test]
    fn validation_carve_takes_the_tail() {
        let batch = clean_windows(60, 8, 9); // 53 windows
        let cfg = TrainConfig {
            learning_rate: 0.01,
            batch_size: 8,
            epochs: 2,
            validation_fraction: 0.2, // floor(53 * 0.2) = 10 validation windows
            ..TrainConfig::default()
        };
        let mut model = build_model(&ModelConfig::new(8, 4, vec![3]), 1).unwrap();
        let curves = fit(&mut model, &batch, &cfg).unwrap();
        assert_eq!(curves.train_loss.len(), 2);
        assert!(curves.val_loss.iter().all(|v| v.is_finite()));

        // The validation loss must equal the mean loss over the last 10
        // windows under the final parameters.
        let (_, tail) = batch.split_tail(10).unwrap();
        let recomputed = mean_loss(&model, &tail, None).unwrap();
        assert!((curves.val_loss[1] - recomputed).abs() < 1e-15);
    }

    #[test]
    fn patience_stops_stale_runs_early() {
        // A zero projection reconstructs a zero window exactly: the loss
        // is 0 from epoch one, all gradients vanish, and no epoch can
        // improve on the first. Patience must cut the run short.
        let (mut model, _) = tiny_model_and_window();
        model.proj_w = crate::linalg::Matrix::zeros(model.proj_w.rows(), model.proj_w.cols());
        model.proj_b = vec![0.0; model.proj_b.len()];
        let window = vec![vec![0.0, 0.0]; 3];
        let batch = single_window_batch(&window);
        let cfg = TrainConfig {
            batch_size: 1,
            epochs: 50,
            patience: Some(3),
            ..TrainConfig::default()
        };
        let curves = fit(&mut model, &batch, &cfg).unwrap();
        // Epoch 1 sets the best; epochs 2-4 are stale; stop after 4.
        assert_eq!(curves.train_loss.len(), 4);
        assert!(curves.train_loss.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn curves_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        let curves = LearningCurves {
            train_loss: vec![0.5, 0.25, 0.125],
            val_loss: vec![0.6, 0.3, f64::NAN],
        };
        curves.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epoch,train_loss,val_loss");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,0.5,"));
        assert!(lines[3].contains("NaN"));
    }

    #[test]
    fn grad_check_tiny_model_passes() {
        let (model, window) = tiny_model_and_window();
        let err = grad_check(&model, &window, 1e-5).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn grad_check_epsilon_bounds() {
        let (model, window) = tiny_model_and_window();
        assert!(grad_check(&model, &window, 1e-8).is_err());
        assert!(grad_check(&model, &window, 1e-2).is_err());
    }

    #[test]
    fn grad_check_perfect_reconstruction_is_zero() {
        // Zero projection on a zero window reproduces the input exactly,
        // so the kink mask removes every output entry and both gradient
        // sides vanish.
        let (mut model, _) = tiny_model_and_window();
        model.proj_w = crate::linalg::Matrix::zeros(model.proj_w.rows(), model.proj_w.cols());
        model.proj_b = vec![0.0; model.proj_b.len()];
        let window = vec![vec![0.0, 0.0]; 3];
        let err = grad_check(&model, &window, 1e-5).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn grad_check_epsilon_sweep_stays_reasonable() {
        // The finite-difference error curve is U-shaped in epsilon
        // (roundoff below, truncation above), so the sweep is reported
        // rather than asserted pairwise; only the recommended epsilon
        // carries a hard bound.
        let (model, window) = tiny_model_and_window();
        for eps in [1e-6, 1e-5, 1e-4, 1e-3] {
            let err = grad_check(&model, &window, eps).unwrap();
            println!("epsilon {eps:e}: max relative error {err:e}");
            assert!(err.is_finite() && err >= 0.0);
        }
        assert!(grad_check(&model, &window, 1e-5).unwrap() < 1e-4);
    }
}
