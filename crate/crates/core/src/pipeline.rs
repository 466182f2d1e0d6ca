//! Two-stage pipeline: offline incremental initialization on the training
//! part, then drift-gated retraining over the stream batches.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{self, DatasetSchema, Instance, LabeledBatch, SplitSpec, SyntheticStreamSpec};
use crate::drift::{Detector, DetectorKind, DetectorLevel, DetectorParams, DriftDetector};
use crate::error::{Error, Result};
use crate::learners::Classifier;
use crate::models::{build_model, ModelKind, ModelParams};
use crate::report::{self, aggregate, confusion, BatchMetrics, ConfigEcho, RetrainEntry, RunReport};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Retrain when the batch's provisional AUC falls below the previous
    /// batch's AUC.
    NoDetector,
    Ddm,
    Eddm,
    Adwin,
    AlwaysRetrain,
    NeverRetrain,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::NoDetector,
        StrategyKind::Ddm,
        StrategyKind::Eddm,
        StrategyKind::Adwin,
        StrategyKind::AlwaysRetrain,
        StrategyKind::NeverRetrain,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::NoDetector => "none",
            StrategyKind::Ddm => "ddm",
            StrategyKind::Eddm => "eddm",
            StrategyKind::Adwin => "adwin",
            StrategyKind::AlwaysRetrain => "always",
            StrategyKind::NeverRetrain => "never",
        }
    }

    pub fn detector_kind(&self) -> Option<DetectorKind> {
        match self {
            StrategyKind::Ddm => Some(DetectorKind::Ddm),
            StrategyKind::Eddm => Some(DetectorKind::Eddm),
            StrategyKind::Adwin => Some(DetectorKind::Adwin),
            _ => None,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let name = s.trim().to_ascii_lowercase();
        if name == "adwm" {
            return Ok(StrategyKind::Adwin);
        }
        Self::ALL.into_iter().find(|k| k.as_str() == name).ok_or_else(|| {
            format!("unknown strategy `{s}` (expected one of none, ddm, eddm, adwin, adwm, always, never)")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalOrder {
    /// A retrained batch is re-predicted by the updated model.
    Refit,
    /// Every instance is scored before the model learns it.
    Prequential,
}

impl fmt::Display for EvalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalOrder::Refit => "refit",
            EvalOrder::Prequential => "prequential",
        })
    }
}

impl FromStr for EvalOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "refit" => Ok(EvalOrder::Refit),
            "prequential" => Ok(EvalOrder::Prequential),
            other => Err(format!("unknown eval order `{other}` (expected refit or prequential)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub detectors: DetectorParams,
    pub eval_order: EvalOrder,
    /// AUC decline needed to trigger a retrain without a detector.
    pub s1_min_drop: f64,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            detectors: DetectorParams::default(),
            eval_order: EvalOrder::Refit,
            s1_min_drop: 0.0,
        }
    }

    pub fn with_eval_order(self, eval_order: EvalOrder) -> Self {
        Self { eval_order, ..self }
    }
}

#[derive(Debug)]
pub struct PipelineState {
    pub model: Box<dyn Classifier>,
    pub detector: Option<Detector>,
    /// Times the model has been trained on a batch, Stage I included.
    pub k: usize,
    pub stage1_batches: usize,
    pub last_batch_auc: Option<f64>,
    pub metrics: Vec<BatchMetrics>,
    pub retrain_log: Vec<RetrainEntry>,
    /// Stream instances consumed so far in Stage II.
    pub stream_index: u64,
}

impl PipelineState {
    pub fn stage2_retrains(&self) -> usize {
        self.k - self.stage1_batches
    }
}

/// Stage I: trains `model` on the training data batch by batch.
pub fn offline_initialize(
    mut model: Box<dyn Classifier>,
    train: &[Instance],
    batch_size: usize,
    strategy: &StrategyConfig,
) -> Result<PipelineState> {
    if train.is_empty() {
        return Err(Error::InvalidData("empty training set".into()));
    }
    let batches = data::make_batches(train, batch_size)?;
    for batch in &batches {
        model.learn_batch(batch)?;
    }
    Ok(PipelineState {
        model,
        detector: strategy
            .kind
            .detector_kind()
            .map(|kind| Detector::new(kind, &strategy.detectors)),
        k: batches.len(),
        stage1_batches: batches.len(),
        last_batch_auc: None,
        metrics: Vec::new(),
        retrain_log: Vec::new(),
        stream_index: 0,
    })
}

fn predict_all(model: &dyn Classifier, batch: &LabeledBatch) -> Result<Vec<u8>> {
    batch
        .instances
        .iter()
        .map(|inst| model.predict_one(&inst.features))
        .collect()
}

/// Stage II step for one batch: score, detect, retrain if flagged, evaluate.
pub fn process_stream_batch(
    state: &mut PipelineState,
    batch: &LabeledBatch,
    strategy: &StrategyConfig,
) -> Result<BatchMetrics> {
    let truths = batch.labels();
    let provisional = predict_all(state.model.as_ref(), batch)?;
    let flag = match strategy.kind {
        StrategyKind::AlwaysRetrain => true,
        StrategyKind::NeverRetrain => false,
        StrategyKind::NoDetector => {
            let auc = report::metrics(&confusion(&provisional, &truths)?).auc;
            state
                .last_batch_auc
                .is_some_and(|prev| prev - auc > strategy.s1_min_drop)
        }
        StrategyKind::Ddm | StrategyKind::Eddm | StrategyKind::Adwin => {
            let detector = state
                .detector
                .as_mut()
                .ok_or_else(|| Error::InvalidArgument("strategy needs a detector".into()))?;
            let mut drift = false;
            for (i, (&p, &t)) in provisional.iter().zip(&truths).enumerate() {
                let index = state.stream_index + i as u64;
                if detector.update(u8::from(p != t), index)? == DetectorLevel::Drift {
                    drift = true;
                    detector.reset();
                }
            }
            drift
        }
    };
    state.stream_index += batch.len() as u64;
    if flag {
        state.model.learn_batch(batch)?;
        state.k += 1;
    }
    let predictions = if flag && strategy.eval_order == EvalOrder::Refit {
        predict_all(state.model.as_ref(), batch)?
    } else {
        provisional
    };
    let metrics = BatchMetrics::new(batch.index, confusion(&predictions, &truths)?);
    state.last_batch_auc = Some(metrics.auc);
    state.metrics.push(metrics);
    state.retrain_log.push(RetrainEntry {
        batch: batch.index,
        drift_flagged: flag,
        retrained: flag,
        detector_state: state.detector.as_ref().map(DriftDetector::level),
    });
    Ok(metrics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSource {
    Csv { path: PathBuf, schema: DatasetSchema },
    Synthetic(SyntheticStreamSpec),
}

impl DataSource {
    pub fn id(&self) -> String {
        match self {
            DataSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            DataSource::Synthetic(_) => "synthetic".into(),
        }
    }

    pub fn load(&self) -> Result<(Vec<Instance>, usize)> {
        match self {
            DataSource::Csv { path, schema } => Ok((data::load_csv(path, schema)?, schema.n_features())),
            DataSource::Synthetic(spec) => Ok((data::generate_synthetic(spec)?, spec.n_features)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub source: DataSource,
    pub model: ModelKind,
    pub params: ModelParams,
    pub strategy: StrategyConfig,
    pub split: SplitSpec,
    /// Seeds the model; the split and a synthetic source carry their own.
    pub seed: u64,
}

/// Split, Stage I and Stage II over already loaded data.
pub fn run_on_data(spec: &RunSpec, dataset_id: &str, data: &[Instance], n_features: usize) -> Result<RunReport> {
    let start = Instant::now();
    let (train, test) = data::split(data, &spec.split).map_err(|e| e.in_stage("split"))?;
    let model = build_model(spec.model, &spec.params, n_features, derive_seed(spec.seed, 1))
        .map_err(|e| e.in_stage("model construction"))?;
    let mut state = offline_initialize(model, &train, spec.split.batch_size, &spec.strategy)
        .map_err(|e| e.in_stage("stage I"))?;
    let batches = data::make_batches(&test, spec.split.batch_size).map_err(|e| e.in_stage("stage II"))?;
    for batch in &batches {
        process_stream_batch(&mut state, batch, &spec.strategy)
            .map_err(|e| e.in_stage(format!("stage II, batch {}", batch.index)))?;
    }
    let means = aggregate(&state.metrics).map_err(|e| e.in_stage("report"))?;
    Ok(RunReport {
        config: ConfigEcho {
            model: spec.model.to_string(),
            strategy: spec.strategy.kind.to_string(),
            dataset: dataset_id.to_string(),
            seed: spec.seed,
            batch_size: spec.split.batch_size,
            eval_order: spec.strategy.eval_order.to_string(),
        },
        retrains: state.stage2_retrains(),
        batches: state.metrics,
        mean_sensitivity: means.sensitivity,
        mean_specificity: means.specificity,
        mean_auc: means.auc,
        retrain_log: state.retrain_log,
        wall_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Loads the source and runs the whole pipeline. Wall time covers the split
/// and both stages, not loading.
pub fn run_pipeline(spec: &RunSpec) -> Result<RunReport> {
    let (data, n_features) = spec.source.load().map_err(|e| e.in_stage("load"))?;
    run_on_data(spec, &spec.source.id(), &data, n_features)
}
