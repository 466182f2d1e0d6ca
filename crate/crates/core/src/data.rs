//! Stream ingestion: CSV loading, stratified splitting, batching and
//! synthetic drifting streams.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const NEGATIVE: u8 = 0;
pub const POSITIVE: u8 = 1;

/// One observation: a finite feature vector and a binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: u8,
}

impl Instance {
    pub fn new(features: Vec<f64>, label: u8) -> Result<Self> {
        if label > 1 {
            return Err(Error::InvalidData(format!("label {label} is not 0 or 1")));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "feature {pos} is not finite ({})",
                features[pos]
            )));
        }
        Ok(Self { features, label })
    }
}

/// An ordered, non-empty chunk of the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    pub index: usize,
    pub instances: Vec<Instance>,
}

impl LabeledBatch {
    pub fn new(index: usize, instances: Vec<Instance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::InvalidArgument("batch must not be empty".into()));
        }
        Ok(Self { index, instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.instances.iter().map(|i| i.label).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub feature_names: Vec<String>,
    pub label_column: String,
    pub positive_label: String,
}

impl DatasetSchema {
    pub fn new(
        feature_names: Vec<String>,
        label_column: impl Into<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        let label_column = label_column.into();
        if feature_names.iter().any(|f| *f == label_column) {
            return Err(Error::InvalidArgument(format!(
                "label column `{label_column}` is also listed as a feature"
            )));
        }
        if feature_names.is_empty() {
            return Err(Error::InvalidArgument("schema has no features".into()));
        }
        Ok(Self {
            feature_names,
            label_column,
            positive_label: positive_label.into(),
        })
    }

    /// Builds a schema whose features are every header column except the label.
    pub fn from_header(
        path: &Path,
        label_column: impl Into<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        let label_column = label_column.into();
        let mut reader = csv_reader(path)?;
        let headers = read_headers(&mut reader, path)?;
        if !headers.iter().any(|h| h == label_column) {
            return Err(Error::MissingColumn {
                path: path.to_path_buf(),
                column: label_column,
            });
        }
        let features = headers
            .iter()
            .filter(|h| *h != label_column)
            .map(str::to_owned)
            .collect();
        Self::new(features, label_column, positive_label)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::InvalidData(format!("{}: {other:?}", path.display())),
        })
}

fn read_headers(reader: &mut csv::Reader<std::fs::File>, path: &Path) -> Result<csv::StringRecord> {
    let headers = reader.headers().map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok(headers.clone())
}

/// Loads a comma-separated file with a header row.
///
/// Rows are numbered from 1 for the first data record (the header is not
/// counted). Label tokens equal to `schema.positive_label` map to 1, every
/// other token maps to 0. Empty or non-finite feature cells are rejected.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<Vec<Instance>> {
    let mut reader = csv_reader(path)?;
    let headers = read_headers(&mut reader, path)?;
    let position = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_owned(),
            })
    };
    let label_pos = position(&schema.label_column)?;
    let feature_pos = schema
        .feature_names
        .iter()
        .map(|f| position(f))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cell = |pos: usize, column: &str| -> Result<&str> {
            record.get(pos).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: column.to_owned(),
                message: "row is shorter than the header".into(),
            })
        };
        let mut features = Vec::with_capacity(feature_pos.len());
        for (&pos, name) in feature_pos.iter().zip(&schema.feature_names) {
            let raw = cell(pos, name)?;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: name.clone(),
                message,
            };
            if raw.is_empty() {
                return Err(parse_err("missing value".into()));
            }
            let value: f64 = raw
                .parse()
                .map_err(|_| parse_err(format!("`{raw}` is not a number")))?;
            if !value.is_finite() {
                return Err(parse_err(format!("`{raw}` is not finite")));
            }
            features.push(value);
        }
        let token = cell(label_pos, &schema.label_column)?;
        let label = if token == schema.positive_label {
            POSITIVE
        } else {
            NEGATIVE
        };
        out.push(Instance { features, label });
    }
    if out.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok(out)
}

/// Writes instances as a dataset CSV (`f0..f{d-1},label`, labels `0`/`1`)
/// readable by [`load_csv`] with positive label `1`.
pub fn write_csv(path: &Path, instances: &[Instance]) -> Result<()> {
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Serialize(format!("{other:?}")),
    };
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    let d = instances.first().map_or(0, |i| i.features.len());
    let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    writer.write_record(&header).map_err(io_err)?;
    for inst in instances {
        let mut row: Vec<String> = inst.features.iter().map(|v| v.to_string()).collect();
        row.push(inst.label.to_string());
        writer.write_record(&row).map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Schema matching files produced by [`write_csv`].
pub fn synthetic_schema(n_features: usize) -> DatasetSchema {
    DatasetSchema {
        feature_names: (0..n_features).map(|j| format!("f{j}")).collect(),
        label_column: "label".into(),
        positive_label: "1".into(),
    }
}

/// How the Stage-I training part is drawn from the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    /// Per-class random selection, see [`stratified_split`].
    Stratified,
    /// The first `train_fraction` of the source, see [`temporal_split`].
    Temporal,
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::Stratified => "stratified",
            SplitMode::Temporal => "temporal",
        })
    }
}

impl FromStr for SplitMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stratified" => Ok(SplitMode::Stratified),
            "temporal" => Ok(SplitMode::Temporal),
            other => Err(format!("unknown split mode `{other}` (expected stratified or temporal)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub batch_size: usize,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.30,
            seed: 0,
            batch_size: 500,
            mode: SplitMode::Stratified,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config(
                "train_fraction",
                format!("{} is outside (0, 1)", self.train_fraction),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Stratified random split into (train, test).
///
/// Each class contributes `round(train_fraction * count)` instances to the
/// training side. Selection is shuffled by `spec.seed`; afterwards both sides
/// are put back into source order so the test side still reads as a stream.
pub fn stratified_split(data: &[Instance], spec: &SplitSpec) -> Result<(Vec<Instance>, Vec<Instance>)> {
    spec.validate()?;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, inst) in data.iter().enumerate() {
        by_class[inst.label as usize].push(i);
    }
    if by_class.iter().any(Vec::is_empty) {
        return Err(Error::InvalidData(
            "stratified split needs both classes present".into(),
        ));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut in_train = vec![false; data.len()];
    for (class, idx) in by_class.iter_mut().enumerate() {
        let n_train = (spec.train_fraction * idx.len() as f64).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::InvalidData(format!(
                "train fraction {} leaves one side without class {class} ({} instances)",
                spec.train_fraction,
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (inst, &t) in data.iter().zip(&in_train) {
        if t {
            train.push(inst.clone());
        } else {
            test.push(inst.clone());
        }
    }
    Ok((train, test))
}

/// Prefix split: the first `round(train_fraction * len)` instances train,
/// the rest form the stream. Used for drifting synthetic streams, where a
/// random split would leak later concepts into Stage I.
pub fn temporal_split(data: &[Instance], spec: &SplitSpec) -> Result<(Vec<Instance>, Vec<Instance>)> {
    spec.validate()?;
    let n_train = (spec.train_fraction * data.len() as f64).round() as usize;
    if n_train == 0 || n_train >= data.len() {
        return Err(Error::InvalidData(format!(
            "train fraction {} leaves one side of {} instances empty",
            spec.train_fraction,
            data.len()
        )));
    }
    Ok((data[..n_train].to_vec(), data[n_train..].to_vec()))
}

/// Dispatches on `spec.mode`.
pub fn split(data: &[Instance], spec: &SplitSpec) -> Result<(Vec<Instance>, Vec<Instance>)> {
    match spec.mode {
        SplitMode::Stratified => stratified_split(data, spec),
        SplitMode::Temporal => temporal_split(data, spec),
    }
}

/// Splits `data` into consecutive batches of `batch_size` (the last may be
/// shorter), indexed from 0.
pub fn make_batches(data: &[Instance], batch_size: usize) -> Result<Vec<LabeledBatch>> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidArgument("cannot batch an empty sequence".into()));
    }
    Ok(data
        .chunks(batch_size)
        .enumerate()
        .map(|(index, chunk)| LabeledBatch {
            index,
            instances: chunk.to_vec(),
        })
        .collect())
}

/// Generating concept of one synthetic segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Concept {
    /// Unit-variance Gaussian classes. Feature 0 has mean `+separation/2`
    /// for positives and `-separation/2` for negatives; every other feature
    /// has mean `+separation/2` for both classes.
    Means,
    /// [`Concept::Means`] with every mean negated, so a model fitted to one
    /// concept labels the other one backwards.
    MeansFlipped,
    /// Standard-normal features; label is the XOR of the signs of features 0 and 1.
    Xor2,
    /// [`Concept::Xor2`] with the label inverted.
    Xor2Flipped,
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Concept::Means => "means",
            Concept::MeansFlipped => "means-flip",
            Concept::Xor2 => "xor2",
            Concept::Xor2Flipped => "xor2-flip",
        })
    }
}

impl FromStr for Concept {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "means" | "shifted-means" => Ok(Concept::Means),
            "means-flip" | "shifted-means-flip" => Ok(Concept::MeansFlipped),
            "xor2" => Ok(Concept::Xor2),
            "xor2-flip" => Ok(Concept::Xor2Flipped),
            other => Err(format!(
                "unknown concept `{other}` (expected means, means-flip, xor2, xor2-flip)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStreamSpec {
    pub n_instances: usize,
    pub n_features: usize,
    pub drift_points: Vec<usize>,
    pub concepts: Vec<Concept>,
    pub noise_rate: f64,
    pub positive_rate: f64,
    /// Distance between class means, in standard deviations, on every feature.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SyntheticStreamSpec {
    fn default() -> Self {
        Self {
            n_instances: 10_000,
            n_features: 2,
            drift_points: Vec::new(),
            concepts: vec![Concept::Means],
            noise_rate: 0.0,
            positive_rate: 0.5,
            separation: 6.0,
            seed: 0,
        }
    }
}

impl SyntheticStreamSpec {
    /// Shifted-means stream whose class means swap at every drift point.
    pub fn shifted_means(n_instances: usize, n_features: usize, drift_points: Vec<usize>, seed: u64) -> Self {
        let concepts = (0..=drift_points.len())
            .map(|s| if s % 2 == 0 { Concept::Means } else { Concept::MeansFlipped })
            .collect();
        Self {
            n_instances,
            n_features,
            drift_points,
            concepts,
            seed,
            ..Self::default()
        }
    }

    pub fn xor2(n_instances: usize, n_features: usize, seed: u64) -> Self {
        Self {
            n_instances,
            n_features,
            concepts: vec![Concept::Xor2],
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(format!("synth.{key}"), msg));
        if self.n_instances == 0 {
            return bad("n_instances", "must be at least 1".into());
        }
        if self.n_features == 0 {
            return bad("n_features", "must be at least 1".into());
        }
        if self.drift_points.windows(2).any(|w| w[0] >= w[1]) {
            return bad("drift_points", "must be strictly increasing".into());
        }
        if self.drift_points.iter().any(|&p| p >= self.n_instances) {
            return bad(
                "drift_points",
                format!("every point must be < n_instances ({})", self.n_instances),
            );
        }
        if self.concepts.len() != self.drift_points.len() + 1 {
            return bad(
                "concepts",
                format!(
                    "need {} concepts (one per segment), got {}",
                    self.drift_points.len() + 1,
                    self.concepts.len()
                ),
            );
        }
        let needs_two = self
            .concepts
            .iter()
            .any(|c| matches!(c, Concept::Xor2 | Concept::Xor2Flipped));
        if needs_two && self.n_features < 2 {
            return bad("n_features", "xor2 concepts need at least 2 features".into());
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return bad("noise_rate", format!("{} is outside [0, 0.5)", self.noise_rate));
        }
        if !(self.positive_rate > 0.0 && self.positive_rate < 1.0) {
            return bad("positive_rate", format!("{} is outside (0, 1)", self.positive_rate));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad("separation", format!("{} must be finite and >= 0", self.separation));
        }
        Ok(())
    }

    /// Concept active at stream position `index`.
    pub fn concept_at(&self, index: usize) -> Concept {
        let segment = self.drift_points.partition_point(|&p| p <= index);
        self.concepts[segment]
    }
}

/// Generates a deterministic synthetic stream.
///
/// Every instance consumes the same fixed sequence of draws (label, noise,
/// then one normal per feature) whatever its concept, so identical specs give
/// identical streams.
pub fn generate_synthetic(spec: &SyntheticStreamSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let half = spec.separation / 2.0;
    let mut out = Vec::with_capacity(spec.n_instances);
    for index in 0..spec.n_instances {
        let label_draw: f64 = rng.random();
        let noise_draw: f64 = rng.random();
        let noise: Vec<f64> = (0..spec.n_features)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let (features, label) = match spec.concept_at(index) {
            c @ (Concept::Means | Concept::MeansFlipped) => {
                let label = u8::from(label_draw < spec.positive_rate);
                let sign = if c == Concept::Means { 1.0 } else { -1.0 };
                let class_mean = if label == POSITIVE { half } else { -half };
                let features = noise
                    .iter()
                    .enumerate()
                    .map(|(j, z)| sign * if j == 0 { class_mean } else { half } + z)
                    .collect::<Vec<_>>();
                (features, label)
            }
            c @ (Concept::Xor2 | Concept::Xor2Flipped) => {
                let xor = (noise[0] > 0.0) != (noise[1] > 0.0);
                let label = u8::from(xor != (c == Concept::Xor2Flipped));
                (noise, label)
            }
        };
        let label = if noise_draw < spec.noise_rate { 1 - label } else { label };
        out.push(Instance { features, label });
    }
    Ok(out)
}
