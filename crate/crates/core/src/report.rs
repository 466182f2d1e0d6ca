//! Confusion counts, per-batch metrics, aggregation and report output.
//!
//! The `auc` reported here is the balanced mean of sensitivity and
//! specificity computed from hard labels, not the area under a ROC curve.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::drift::DetectorLevel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.tn + self.fp
    }
}

/// Positional counting with label 1 as the positive class.
pub fn confusion(predictions: &[u8], truths: &[u8]) -> Result<ConfusionCounts> {
    if predictions.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("no predictions to count".into()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        match (p == 1, t == 1) {
            (true, true) => c.tp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
}

/// Sensitivity and specificity are 0 when their class is absent.
pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let rate = |hit: u64, miss: u64| {
        if hit + miss == 0 {
            0.0
        } else {
            hit as f64 / (hit + miss) as f64
        }
    };
    from_rates(rate(c.tp, c.fn_), rate(c.tn, c.fp))
}

pub fn from_rates(sensitivity: f64, specificity: f64) -> Metrics {
    Metrics {
        sensitivity,
        specificity,
        auc: (sensitivity + specificity) / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub batch: usize,
    pub counts: ConfusionCounts,
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
}

impl BatchMetrics {
    pub fn new(batch: usize, counts: ConfusionCounts) -> Self {
        let m = metrics(&counts);
        Self {
            batch,
            counts,
            sensitivity: m.sensitivity,
            specificity: m.specificity,
            auc: m.auc,
        }
    }
}

/// Unweighted means over batches (not pooled counts).
pub fn aggregate(per_batch: &[BatchMetrics]) -> Result<Metrics> {
    if per_batch.is_empty() {
        return Err(Error::InvalidArgument("no batches to aggregate".into()));
    }
    let n = per_batch.len() as f64;
    let mean = |f: fn(&BatchMetrics) -> f64| per_batch.iter().map(f).sum::<f64>() / n;
    Ok(Metrics {
        sensitivity: mean(|b| b.sensitivity),
        specificity: mean(|b| b.specificity),
        auc: mean(|b| b.auc),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrainEntry {
    pub batch: usize,
    pub drift_flagged: bool,
    pub retrained: bool,
    /// Detector level after the batch; absent for strategies without one.
    pub detector_state: Option<DetectorLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub model: String,
    pub strategy: String,
    pub dataset: String,
    pub seed: u64,
    pub batch_size: usize,
    pub eval_order: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub batches: Vec<BatchMetrics>,
    pub mean_sensitivity: f64,
    pub mean_specificity: f64,
    pub mean_auc: f64,
    /// Stage-II retrains only.
    pub retrains: usize,
    pub retrain_log: Vec<RetrainEntry>,
    pub wall_ms: f64,
}

impl RunReport {
    /// Copy with the wall-time zeroed, for comparing runs.
    pub fn without_timing(&self) -> RunReport {
        RunReport {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

pub const CSV_HEADER: &str = "batch,tp,fn,tn,fp,sensitivity,specificity,auc";

/// One row per batch plus a `mean` row holding summed counts and mean rates.
pub fn render_csv(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut sum = ConfusionCounts::default();
    for b in &report.batches {
        let c = b.counts;
        sum.tp += c.tp;
        sum.fn_ += c.fn_;
        sum.tn += c.tn;
        sum.fp += c.fp;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            b.batch, c.tp, c.fn_, c.tn, c.fp, b.sensitivity, b.specificity, b.auc
        );
    }
    let _ = writeln!(
        out,
        "mean,{},{},{},{},{:.6},{:.6},{:.6}",
        sum.tp, sum.fn_, sum.tn, sum.fp, report.mean_sensitivity, report.mean_specificity, report.mean_auc
    );
    out
}

pub fn render_json(report: &RunReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn write_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let body = match format {
        ReportFormat::Json => render_json(report)?,
        ReportFormat::Csv => render_csv(report),
    };
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
}
