//! Classification quality of a detection run: confusion counts, the four
//! standard metrics, a threshold-sweep ROC curve with exact trapezoidal
//! AUC, and a two-model comparison table.
//!
//! The positive class is "anomaly" throughout.

use crate::detect::ReconstructionReport;
use crate::error::{Error, Result};

/// Outcome counts of binary decisions against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// 2x2 CSV: rows = truth, columns = decision.
    pub fn to_csv(&self) -> String {
        format!(
            ",flagged_anomaly,flagged_normal\ntruth_anomaly,{},{}\ntruth_normal,{},{}\n",
            self.true_positives, self.false_negatives, self.false_positives, self.true_negatives
        )
    }
}

/// Tallies decisions against truth; both use 1 = anomaly.
pub fn confusion(flags: &[u8], truth: &[u8]) -> Result<ConfusionCounts> {
    if flags.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} flags but {} truth labels",
            flags.len(),
            truth.len()
        )));
    }
    if flags.iter().chain(truth).any(|&v| v > 1) {
        return Err(Error::InvalidArgument(
            "flags and labels must be 0 or 1".into(),
        ));
    }
    let mut cm = ConfusionCounts {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&f, &t) in flags.iter().zip(truth) {
        match (t, f) {
            (1, 1) => cm.true_positives += 1,
            (0, 1) => cm.false_positives += 1,
            (0, 0) => cm.true_negatives += 1,
            _ => cm.false_negatives += 1,
        }
    }
    Ok(cm)
}

/// Accuracy, precision, recall, and F1, all in [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricSet {
    /// `accuracy,precision,recall,f1` header plus one value row.
    pub fn to_csv(&self) -> String {
        format!(
            "accuracy,precision,recall,f1\n{},{},{},{}\n",
            self.accuracy, self.precision, self.recall, self.f1
        )
    }
}

/// The four standard formulas. Degenerate denominators yield 0:
/// precision when nothing was flagged, recall when no anomalies exist,
/// F1 when precision + recall is 0.
pub fn metrics(cm: &ConfusionCounts) -> Result<MetricSet> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "cannot compute metrics over zero windows".into(),
        ));
    }
    let tp = cm.true_positives as f64;
    let accuracy = (tp + cm.true_negatives as f64) / total as f64;
    let flagged = cm.true_positives + cm.false_positives;
    let precision = if flagged > 0 { tp / flagged as f64 } else { 0.0 };
    let actual = cm.true_positives + cm.false_negatives;
    let recall = if actual > 0 { tp / actual as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricSet {
        accuracy,
        precision,
        recall,
        f1,
    })
}

/// Receiver operating characteristic from raw scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// (false-positive rate, true-positive rate), from (0,0) to (1,1),
    /// one point per unique score plus the origin.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl RocCurve {
    /// `fpr,tpr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.points {
            out.push_str(&format!("{fpr},{tpr}\n"));
        }
        out
    }
}

/// Sweeps the decision threshold across the unique loss values, highest
/// first. Tied scores collapse into a single curve point, which makes the
/// trapezoidal AUC equal the pairwise ranking statistic (ties counted
/// half) exactly.
pub fn roc_auc(losses: &[f64], truth: &[u8]) -> Result<RocCurve> {
    if losses.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} losses but {} truth labels",
            losses.len(),
            truth.len()
        )));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument("losses must be finite".into()));
    }
    if truth.iter().any(|&t| t > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let positives = truth.iter().filter(|&&t| t == 1).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidArgument(format!(
            "ROC needs both classes; truth has {positives} anomalies and {negatives} normals"
        )));
    }

    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&a, &b| losses[b].partial_cmp(&losses[a]).expect("finite losses"));

    let mut points = Vec::with_capacity(losses.len() + 1);
    points.push((0.0, 0.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let (mut prev_fpr, mut prev_tpr) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < order.len() {
        // Consume the whole tie group at this score before emitting.
        let score = losses[order[i]];
        while i < order.len() && losses[order[i]] == score {
            if truth[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let fpr = fp as f64 / negatives as f64;
        let tpr = tp as f64 / positives as f64;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        points.push((fpr, tpr));
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    Ok(RocCurve { points, auc })
}

/// Two detection runs on identical windows, summarized side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub first: MetricSet,
    pub second: MetricSet,
    /// `first - second`, metric by metric.
    pub delta: MetricSet,
}

impl ModelComparison {
    /// Fixed-width table with one row per run plus the delta row.
    pub fn render(&self, first_name: &str, second_name: &str) -> String {
        let row = |name: &str, m: &MetricSet| {
            format!(
                "{name:<12} {:>9.4} {:>9.4} {:>9.4} {:>9.4}\n",
                m.accuracy, m.precision, m.recall, m.f1
            )
        };
        let mut out = format!(
            "{:<12} {:>9} {:>9} {:>9} {:>9}\n",
            "model", "accuracy", "precision", "recall", "f1"
        );
        out.push_str(&row(first_name, &self.first));
        out.push_str(&row(second_name, &self.second));
        out.push_str(&row("delta", &self.delta));
        out
    }
}

/// Evaluates both reports against one ground truth. The reports must
/// cover the same windows in the same order.
pub fn compare_models(
    first: &ReconstructionReport,
    second: &ReconstructionReport,
    truth: &[u8],
) -> Result<ModelComparison> {
    if first.window_end_indices != second.window_end_indices {
        return Err(Error::InvalidArgument(
            "reports cover different window sets".into(),
        ));
    }
    let m1 = metrics(&confusion(&first.flags, truth)?)?;
    let m2 = metrics(&confusion(&second.flags, truth)?)?;
    Ok(ModelComparison {
        first: m1,
        second: m2,
        delta: MetricSet {
            accuracy: m1.accuracy - m2.accuracy,
            precision: m1.precision - m2.precision,
            recall: m1.recall - m2.recall,
            f1: m1.f1 - m2.f1,
        },
    })
}
