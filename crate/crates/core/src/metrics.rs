//! Confusion matrix, accuracy/precision/recall/F1, ROC and AUC, and
//! probability-level MSE/RMSE, plus plot-ready report files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_inputs(labels: &[u8], probs: &[f64]) -> Result<()> {
    if labels.len() != probs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels but {} probabilities",
            labels.len(),
            probs.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no examples to score".into()));
    }
    Ok(())
}

/// Tallies predictions, where a probability at or above `threshold` counts
/// as positive.
pub fn confusion(labels: &[u8], probs: &[f64], threshold: f64) -> Result<ConfusionMatrix> {
    check_inputs(labels, probs)?;
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(probs) {
        match (y == 1, p >= threshold) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// F1 as the harmonic mean of precision and recall; zero when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// `(accuracy, precision, recall, f1)`. Empty denominators give 0.
pub fn scalar_metrics(cm: &ConfusionMatrix) -> (f64, f64, f64, f64) {
    let accuracy = ratio(cm.tp + cm.tn, cm.total());
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    (accuracy, precision, recall, f1_score(precision, recall))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Sweeps the threshold down through every distinct score and integrates
/// the resulting curve with the trapezoid rule. Tied scores move as one
/// step, which yields the half-credit tie convention.
pub fn roc_auc(labels: &[u8], probs: &[f64]) -> Result<RocCurve> {
    check_inputs(labels, probs)?;
    let pos = labels.iter().filter(|&&y| y == 1).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument(
            "ROC needs at least one positive and one negative label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area = 0u128;
    let mut i = 0;
    while i < order.len() {
        let score = probs[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && probs[order[i]] == score {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // Trapezoid in count units, kept exact in integers.
        twice_area += ((fp - fp0) as u128) * ((tp + tp0) as u128);
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = twice_area as f64 / (2.0 * pos as f64 * neg as f64);
    Ok(RocCurve { points, auc })
}

/// Mean squared error of raw probabilities against 0/1 labels, and its root.
pub fn mse_rmse(labels: &[u8], probs: &[f64]) -> Result<(f64, f64)> {
    check_inputs(labels, probs)?;
    let sum: f64 = labels
        .iter()
        .zip(probs)
        .map(|(&y, &p)| (p - y as f64).powi(2))
        .sum();
    let mse = sum / labels.len() as f64;
    Ok((mse, mse.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
    pub mse: f64,
    pub rmse: f64,
    pub threshold: f64,
    #[serde(flatten)]
    pub confusion: ConfusionMatrix,
}

/// The keys of the metrics file, in emission order.
pub const REPORT_KEYS: [&str; 12] = [
    "accuracy", "precision", "recall", "f1", "auc_roc", "mse", "rmse", "threshold", "tp", "fp", "tn", "fn",
];

/// Computes every metric plus the ROC curve in one pass.
pub fn evaluate(labels: &[u8], probs: &[f64], threshold: f64) -> Result<(MetricsReport, RocCurve)> {
    let cm = confusion(labels, probs, threshold)?;
    let (accuracy, precision, recall, f1) = scalar_metrics(&cm);
    let roc = roc_auc(labels, probs)?;
    let (mse, rmse) = mse_rmse(labels, probs)?;
    Ok((
        MetricsReport {
            accuracy,
            precision,
            recall,
            f1,
            auc_roc: roc.auc,
            mse,
            rmse,
            threshold,
            confusion: cm,
        },
        roc,
    ))
}

pub fn report_to_json(report: &MetricsReport) -> String {
    serde_json::to_string_pretty(report).expect("metrics serialise")
}

pub fn report_from_json(text: &str) -> Result<MetricsReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("metrics report: {e}")))
}

pub fn roc_to_csv(roc: &RocCurve) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in &roc.points {
        out.push_str(&format!("{fpr},{tpr}\n"));
    }
    out
}

/// A 2×2 table with rows for the actual class and columns for the
/// predicted class.
pub fn confusion_to_csv(cm: &ConfusionMatrix) -> String {
    format!(
        "actual,predicted_0,predicted_1\n0,{},{}\n1,{},{}\n",
        cm.tn, cm.fp, cm.fn_, cm.tp
    )
}

/// Writes `metrics.json`, `roc.csv` and `confusion.csv` under `dir` and
/// returns the paths written.
pub fn emit_report(report: &MetricsReport, roc: &RocCurve, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("metrics.json", report_to_json(report)),
        ("roc.csv", roc_to_csv(roc)),
        ("confusion.csv", confusion_to_csv(&report.confusion)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
