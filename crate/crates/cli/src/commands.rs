//! The five subcommand implementations. Each one runs its pipeline,
//! writes every artifact it promised, and finishes by writing a run
//! manifest that digests the inputs and outputs — so a zero exit code
//! means every file named in the manifest exists with the recorded
//! content.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tsad_core::data::{generate_synthetic, load_csv, write_csv, SynthConfig, FEATURE_COUNT};
use tsad_core::detect::{classify, estimate_threshold};
use tsad_core::eval::{compare_models, confusion, metrics, roc_auc, RocCurve};
use tsad_core::model::{build_model, load_model, save_model, ModelConfig};
use tsad_core::train::{fit, TrainConfig};

use crate::manifest::{RunManifest, ThresholdRecord};
use crate::pipeline::{prepare, read_report_csv, score_windows, truth_for_report};
use crate::plots;
use crate::{CompareArgs, DetectArgs, EvalArgs, SynthArgs, TrainArgs};

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Joins `name` onto the directory holding `alongside`, staying relative
/// when the path has no directory part.
fn sibling(alongside: &Path, name: &str) -> PathBuf {
    match alongside.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(name),
        _ => PathBuf::from(name),
    }
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        rows: args.rows,
        anomaly_fraction: args.anomaly_fraction,
        kinds: args.kinds.clone(),
        anomaly_start_fraction: args.anomaly_start_fraction,
        event_len_range: (args.event_len_min, args.event_len_max),
    };
    let frame = generate_synthetic(&cfg, args.seed).context("generating series")?;
    write_csv(&args.out, &frame)
        .with_context(|| format!("writing data CSV {}", args.out.display()))?;

    let mut manifest = RunManifest::new("synth");
    manifest.flag("rows", args.rows as u64);
    manifest.flag("anomaly_fraction", args.anomaly_fraction);
    manifest.flag(
        "kinds",
        args.kinds
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.flag("anomaly_start_fraction", args.anomaly_start_fraction);
    manifest.flag("event_len_min", args.event_len_min as u64);
    manifest.flag("event_len_max", args.event_len_max as u64);
    manifest.flag("seed", args.seed);
    manifest.flag("out", path_str(&args.out));
    manifest.count("rows", frame.len() as u64);
    manifest.count("anomaly_rows", frame.anomaly_count() as u64);
    manifest.output(&args.out)?;
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "synth_manifest.json"));
    manifest.write(&manifest_path)?;

    println!(
        "wrote {} rows ({} anomalous) to {}",
        frame.len(),
        frame.anomaly_count(),
        args.out.display()
    );
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;
    let frame = load_csv(&args.data)
        .with_context(|| format!("loading data {}", args.data.display()))?;

    let mut config = ModelConfig::new(args.lookback, FEATURE_COUNT, args.widths.clone());
    if let Some(arch) = args.baseline {
        config.architecture = arch;
    }
    config.validate().context("checking model configuration")?;

    let prepared = prepare(&frame, args.train_ratio, args.scaler, args.lookback)?;
    let mut model = build_model(&config, args.seed).context("initializing model")?;
    let train_cfg = TrainConfig {
        learning_rate: args.learning_rate,
        batch_size: args.batch_size,
        epochs: args.epochs,
        validation_fraction: args.val_fraction,
        seed: args.seed,
        clip_norm: args.clip_norm,
        patience: args.patience,
        threads: args.threads,
        ..TrainConfig::default()
    };
    let curves = fit(&mut model, &prepared.train_windows, &train_cfg).context("fitting model")?;

    let model_path = args.out_dir.join("model.bin");
    let curves_path = args.out_dir.join("curves.csv");
    save_model(&model_path, &model)
        .with_context(|| format!("writing model {}", model_path.display()))?;
    curves
        .write_csv(&curves_path)
        .with_context(|| format!("writing curves {}", curves_path.display()))?;

    let n_windows = prepared.train_windows.len();
    let n_val = (n_windows as f64 * args.val_fraction).floor() as usize;
    let n_val = if n_val > 0 && n_val < n_windows { n_val } else { 0 };

    let mut manifest = RunManifest::new("train");
    manifest.flag("data", path_str(&args.data));
    manifest.flag("out_dir", path_str(&args.out_dir));
    manifest.flag("lookback", args.lookback as u64);
    manifest.flag(
        "widths",
        args.widths
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.flag("architecture", config.architecture.to_string());
    manifest.flag("train_ratio", args.train_ratio);
    manifest.flag("scaler", args.scaler.to_string());
    manifest.flag("learning_rate", args.learning_rate);
    manifest.flag("batch_size", args.batch_size as u64);
    manifest.flag("epochs", args.epochs as u64);
    manifest.flag("val_fraction", args.val_fraction);
    manifest.flag("clip_norm", args.clip_norm);
    match args.patience {
        Some(p) => manifest.flag("patience", p as u64),
        None => manifest.flag("patience", serde_json::Value::Null),
    }
    manifest.flag("seed", args.seed);
    manifest.flag("threads", args.threads as u64);
    record_split_counts(&mut manifest, &prepared.counts);
    record_scaler(&mut manifest, &prepared.scaler);
    manifest.count("train_windows", n_windows as u64);
    manifest.count("validation_windows", n_val as u64);
    manifest.count("fit_windows", (n_windows - n_val) as u64);
    manifest.count("test_windows", prepared.test_windows.len() as u64);
    manifest.count("epochs_run", curves.train_loss.len() as u64);
    manifest.count("parameters", model.param_count() as u64);
    manifest.count_f64(
        "final_train_loss",
        curves.train_loss.last().copied().unwrap_or(f64::NAN),
    );
    manifest.count_f64(
        "final_val_loss",
        curves.val_loss.last().copied().unwrap_or(f64::NAN),
    );
    manifest.input(&args.data)?;
    manifest.output(&model_path)?;
    manifest.output(&curves_path)?;
    manifest.write(&args.out_dir.join("train_manifest.json"))?;

    println!(
        "trained {} parameters for {} epochs; final train loss {:.6}",
        model.param_count(),
        curves.train_loss.len(),
        curves.train_loss.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub fn detect(args: DetectArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;
    let model = load_model(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    if model.config.features != FEATURE_COUNT {
        bail!(
            "model expects {} features but this data schema has {FEATURE_COUNT}",
            model.config.features
        );
    }
    let frame = load_csv(&args.data)
        .with_context(|| format!("loading data {}", args.data.display()))?;
    let prepared = prepare(&frame, args.train_ratio, args.scaler, model.config.lookback)?;

    let train_losses = score_windows(&model, &prepared.train_windows, args.threads)
        .context("scoring training windows")?;
    let eta = estimate_threshold(&train_losses, args.threshold).context("estimating threshold")?;
    let test_losses = score_windows(&model, &prepared.test_windows, args.threads)
        .context("scoring test windows")?;
    let report = classify(
        test_losses,
        eta,
        prepared.test_windows.window_end_indices().to_vec(),
    )
    .context("classifying test windows")?;

    let report_path = args.out_dir.join("report.csv");
    std::fs::write(&report_path, report.to_csv())
        .with_context(|| format!("writing report {}", report_path.display()))?;

    let mut manifest = RunManifest::new("detect");
    manifest.flag("data", path_str(&args.data));
    manifest.flag("model", path_str(&args.model));
    manifest.flag("out_dir", path_str(&args.out_dir));
    manifest.flag("threshold", args.threshold.to_string());
    manifest.flag("train_ratio", args.train_ratio);
    manifest.flag("scaler", args.scaler.to_string());
    manifest.flag("threads", args.threads as u64);
    record_split_counts(&mut manifest, &prepared.counts);
    record_scaler(&mut manifest, &prepared.scaler);
    manifest.count("train_windows", prepared.train_windows.len() as u64);
    manifest.count("test_windows", prepared.test_windows.len() as u64);
    manifest.count("flagged_windows", report.anomaly_count() as u64);
    manifest.threshold = Some(ThresholdRecord {
        strategy: args.threshold.to_string(),
        value: eta,
    });
    manifest.input(&args.data)?;
    manifest.input(&args.model)?;
    manifest.output(&report_path)?;
    manifest.write(&args.out_dir.join("detect_manifest.json"))?;

    println!(
        "flagged {}/{} test windows (threshold {:.6})",
        report.anomaly_count(),
        report.losses.len(),
        eta
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;
    let report = read_report_csv(&args.report)?;
    let frame = load_csv(&args.data)
        .with_context(|| format!("loading data {}", args.data.display()))?;
    let truth = truth_for_report(&frame, args.train_ratio, &report)?;

    let cm = confusion(&report.flags, &truth).context("building confusion matrix")?;
    let ms = metrics(&cm).context("computing metrics")?;

    let confusion_path = args.out_dir.join("confusion.csv");
    let metrics_path = args.out_dir.join("metrics.csv");
    std::fs::write(&confusion_path, cm.to_csv())
        .with_context(|| format!("writing {}", confusion_path.display()))?;
    std::fs::write(&metrics_path, ms.to_csv())
        .with_context(|| format!("writing {}", metrics_path.display()))?;

    // A single-class truth vector leaves the ROC undefined; that is a
    // property of the data, not a pipeline failure.
    let both_classes = truth.contains(&0) && truth.contains(&1);
    let roc: Option<RocCurve> = if both_classes {
        Some(roc_auc(&report.losses, &truth).context("computing ROC")?)
    } else {
        eprintln!("warning: ground truth has a single class; skipping the ROC curve");
        None
    };
    let roc_path = args.out_dir.join("roc.csv");
    if let Some(curve) = &roc {
        std::fs::write(&roc_path, curve.to_csv())
            .with_context(|| format!("writing {}", roc_path.display()))?;
    }

    let mut plot_paths = Vec::new();
    if args.plots {
        let hist_path = args.out_dir.join("loss_histogram.svg");
        let scatter_path = args.out_dir.join("loss_scatter.svg");
        std::fs::write(
            &hist_path,
            plots::loss_histogram_svg(&report.losses, &report.flags),
        )
        .with_context(|| format!("writing {}", hist_path.display()))?;
        std::fs::write(
            &scatter_path,
            plots::loss_scatter_svg(&report.window_end_indices, &report.losses, &report.flags),
        )
        .with_context(|| format!("writing {}", scatter_path.display()))?;
        plot_paths.push(hist_path);
        plot_paths.push(scatter_path);
        if let Some(curve) = &roc {
            let roc_svg_path = args.out_dir.join("roc.svg");
            std::fs::write(&roc_svg_path, plots::roc_svg(curve))
                .with_context(|| format!("writing {}", roc_svg_path.display()))?;
            plot_paths.push(roc_svg_path);
        }
    }

    let mut manifest = RunManifest::new("eval");
    manifest.flag("report", path_str(&args.report));
    manifest.flag("data", path_str(&args.data));
    manifest.flag("train_ratio", args.train_ratio);
    manifest.flag("out_dir", path_str(&args.out_dir));
    manifest.flag("plots", args.plots);
    manifest.count("windows", truth.len() as u64);
    manifest.count("truth_anomalies", truth.iter().filter(|&&t| t == 1).count() as u64);
    manifest.count("flagged_windows", report.anomaly_count() as u64);
    manifest.count("true_positives", cm.true_positives as u64);
    manifest.count("false_positives", cm.false_positives as u64);
    manifest.count("true_negatives", cm.true_negatives as u64);
    manifest.count("false_negatives", cm.false_negatives as u64);
    manifest.count("accuracy", ms.accuracy);
    manifest.count("precision", ms.precision);
    manifest.count("recall", ms.recall);
    manifest.count("f1", ms.f1);
    match &roc {
        Some(curve) => manifest.count("auc", curve.auc),
        None => manifest.count("auc", serde_json::Value::Null),
    }
    manifest.input(&args.report)?;
    manifest.input(&args.data)?;
    manifest.output(&confusion_path)?;
    manifest.output(&metrics_path)?;
    if roc.is_some() {
        manifest.output(&roc_path)?;
    }
    for p in &plot_paths {
        manifest.output(p)?;
    }
    manifest.write(&args.out_dir.join("eval_manifest.json"))?;

    match &roc {
        Some(curve) => println!(
            "accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  auc {:.4}",
            ms.accuracy, ms.precision, ms.recall, ms.f1, curve.auc
        ),
        None => println!(
            "accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  auc n/a",
            ms.accuracy, ms.precision, ms.recall, ms.f1
        ),
    }
    Ok(())
}

pub fn compare(args: CompareArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating output directory {}", args.out_dir.display()))?;
    let first = read_report_csv(&args.report_a)?;
    let second = read_report_csv(&args.report_b)?;
    let frame = load_csv(&args.data)
        .with_context(|| format!("loading data {}", args.data.display()))?;
    let truth = truth_for_report(&frame, args.train_ratio, &first)?;
    let cmp = compare_models(&first, &second, &truth).context("comparing reports")?;

    // AUC rides along when the truth supports it; the metric table never
    // depends on it.
    let both_classes = truth.contains(&0) && truth.contains(&1);
    let (auc_a, auc_b) = if both_classes {
        (
            Some(roc_auc(&first.losses, &truth).context("computing ROC")?.auc),
            Some(roc_auc(&second.losses, &truth).context("computing ROC")?.auc),
        )
    } else {
        eprintln!("warning: ground truth has a single class; AUC column left empty");
        (None, None)
    };

    let auc_cell = |v: Option<f64>| v.map_or(String::new(), |a| a.to_string());
    let mut csv = String::from("model,accuracy,precision,recall,f1,auc\n");
    for (name, m, auc) in [
        (&args.name_a, &cmp.first, auc_a),
        (&args.name_b, &cmp.second, auc_b),
        (
            &"delta".to_string(),
            &cmp.delta,
            auc_a.zip(auc_b).map(|(a, b)| a - b),
        ),
    ] {
        csv.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            auc_cell(auc)
        ));
    }
    let csv_path = args.out_dir.join("comparison.csv");
    std::fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;

    let mut manifest = RunManifest::new("compare");
    manifest.flag("report_a", path_str(&args.report_a));
    manifest.flag("report_b", path_str(&args.report_b));
    manifest.flag("data", path_str(&args.data));
    manifest.flag("train_ratio", args.train_ratio);
    manifest.flag("out_dir", path_str(&args.out_dir));
    manifest.flag("name_a", args.name_a.clone());
    manifest.flag("name_b", args.name_b.clone());
    manifest.count("windows", truth.len() as u64);
    manifest.count("f1_delta", cmp.delta.f1);
    match auc_a.zip(auc_b) {
        Some((a, b)) => manifest.count("auc_delta", a - b),
        None => manifest.count("auc_delta", serde_json::Value::Null),
    }
    manifest.input(&args.report_a)?;
    manifest.input(&args.report_b)?;
    manifest.input(&args.data)?;
    manifest.output(&csv_path)?;
    manifest.write(&args.out_dir.join("compare_manifest.json"))?;

    print!("{}", cmp.render(&args.name_a, &args.name_b));
    Ok(())
}

fn record_split_counts(manifest: &mut RunManifest, counts: &tsad_core::data::SplitCounts) {
    manifest.count("total_rows", counts.total_rows as u64);
    manifest.count("train_rows", counts.train_rows as u64);
    manifest.count(
        "train_anomalies_dropped",
        counts.train_anomalies_dropped as u64,
    );
    manifest.count("train_rows_clean", counts.train_rows_clean as u64);
    manifest.count("test_rows", counts.test_rows as u64);
}

/// Records the fitted per-feature scaler statistics, so a reader can
/// verify `detect` reproduced exactly what `train` saw.
fn record_scaler(manifest: &mut RunManifest, scaler: &tsad_core::data::ScalerParams) {
    let stats: Vec<serde_json::Value> = scaler
        .stats
        .iter()
        .map(|&(a, b)| serde_json::json!([a, b]))
        .collect();
    manifest.count("scaler_stats", serde_json::Value::Array(stats));
}
