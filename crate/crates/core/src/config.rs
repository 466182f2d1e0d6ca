//! Run configuration: a flat file of dotted keys plus `key=value` overrides.
//!
//! Nested TOML tables are flattened, so `[ht]\ngrace = 50` and
//! `"ht.grace" = 50` set the same key. Later assignments win, which lets
//! command-line overrides replace file values.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{Concept, DatasetSchema, SplitSpec, SyntheticStreamSpec};
use crate::error::{Error, Result};
use crate::learners::arf::{Resampling, Subspace};
use crate::learners::experts::BaseKind;
use crate::learners::split::TreeParams;
use crate::models::{ModelKind, ModelParams};
use crate::pipeline::{DataSource, RunSpec, StrategyConfig, StrategyKind};
use crate::report::ReportFormat;

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "data",
    "label_col",
    "positive_label",
    "model",
    "strategy",
    "train_fraction",
    "batch_size",
    "split_mode",
    "eval_order",
    "seed",
    "out",
    "format",
    "s1.min_drop",
    "ddm.min_n",
    "eddm.alpha",
    "eddm.beta",
    "eddm.min_errors",
    "adwin.delta",
    "adwin.max_buckets",
    "nb.var_floor",
    "knn.window",
    "knn.k",
    "ht.delta",
    "ht.tau",
    "ht.grace",
    "ht.max_depth",
    "ht.split_candidates",
    "vfdt.delta",
    "vfdt.tau",
    "vfdt.grace",
    "vfdt.max_depth",
    "vfdt.split_candidates",
    "hat.delta",
    "hat.tau",
    "hat.grace",
    "hat.max_depth",
    "hat.split_candidates",
    "hat.drift_delta",
    "hat.warning_delta",
    "arf.trees",
    "arf.lambda",
    "arf.subspace",
    "arf.resampling",
    "arf.detectors",
    "arf.warning_delta",
    "arf.drift_delta",
    "arf.delta",
    "arf.grace",
    "awe.capacity",
    "awe.base",
    "dwm.beta",
    "dwm.theta",
    "dwm.period",
    "dwm.max_experts",
    "dwm.base",
    "addexp.beta",
    "addexp.gamma",
    "addexp.max_experts",
    "addexp.base",
    "bic.window",
    "bic.base",
    "synth.kind",
    "synth.n_instances",
    "synth.n_features",
    "synth.drift_points",
    "synth.concepts",
    "synth.noise_rate",
    "synth.positive_rate",
    "synth.separation",
    "synth.seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label_col: String,
    pub positive_label: String,
    pub model: ModelKind,
    pub strategy: StrategyConfig,
    pub params: ModelParams,
    pub split: SplitSpec,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub synth: SyntheticStreamSpec,
    /// `means` or `xor2`; picks alternating concepts when none are listed.
    pub synth_kind: String,
    synth_concepts: Option<Vec<Concept>>,
    synth_seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            label_col: "label".into(),
            positive_label: "1".into(),
            model: ModelKind::Ht,
            strategy: StrategyConfig::new(StrategyKind::Adwin),
            params: ModelParams::default(),
            split: SplitSpec::default(),
            seed: 0,
            out: None,
            format: ReportFormat::Json,
            synth: SyntheticStreamSpec::default(),
            synth_kind: "means".into(),
            synth_concepts: None,
            synth_seed: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str, domain: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not valid (expected {domain})")))
}

fn parse_named<T: FromStr<Err = String>>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|msg| Error::config(key, msg))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(key, format!("`{value}` is not valid (expected true or false)"))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str, domain: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s, domain))
        .collect()
}

fn parse_subspace(key: &str, value: &str) -> Result<Subspace> {
    match value.trim().to_ascii_lowercase().as_str() {
        "sqrt" => Ok(Subspace::Sqrt),
        "full" => Ok(Subspace::Full),
        other => other
            .parse()
            .map(Subspace::Count)
            .map_err(|_| Error::config(key, format!("`{value}` is not valid (expected sqrt, full or a count)"))),
    }
}

fn set_tree(tree: &mut TreeParams, field: &str, key: &str, value: &str) -> Result<bool> {
    match field {
        "delta" => tree.delta = parse(key, value, "a real in (0, 1)")?,
        "tau" => tree.tau = parse(key, value, "a non-negative real")?,
        "grace" => tree.grace = parse(key, value, "a positive real")?,
        "max_depth" => tree.max_depth = parse(key, value, "a non-negative integer")?,
        "split_candidates" => tree.split_candidates = parse(key, value, "a positive integer")?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn unknown_key(key: &str) -> Error {
    Error::config(key, format!("unknown key (valid keys: {})", KEYS.join(", ")))
}

/// Flattens a TOML document into `(dotted key, value text)` pairs.
pub fn flatten_toml(text: &str) -> Result<Vec<(String, String)>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
    let mut out = Vec::new();
    flatten_into("", &toml::Value::Table(table), &mut out)?;
    Ok(out)
}

fn flatten_into(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) -> Result<()> {
    let text = match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, v, out)?;
            }
            return Ok(());
        }
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s.clone()),
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(f) => Ok(f.to_string()),
                _ => Err(Error::config(prefix, "lists may only hold strings or numbers")),
            })
            .collect::<Result<Vec<_>>>()?
            .join(","),
        toml::Value::Datetime(_) => return Err(Error::config(prefix, "dates are not accepted")),
    };
    out.push((prefix.to_string(), text));
    Ok(())
}

/// Splits `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "expected key=value"))?;
    Ok((k.trim().replace('-', "_"), v.trim().to_string()))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        for (k, v) in flatten_toml(&text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Assigns one dotted key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        let d = &mut self.strategy.detectors;
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "label_col" => self.label_col = value.to_string(),
            "positive_label" => self.positive_label = value.to_string(),
            "model" => self.model = parse_named(key, value)?,
            "strategy" => self.strategy.kind = parse_named(key, value)?,
            "train_fraction" => self.split.train_fraction = parse(key, value, "a real in (0, 1)")?,
            "batch_size" => self.split.batch_size = parse(key, value, "a positive integer")?,
            "split_mode" => self.split.mode = parse_named(key, value)?,
            "eval_order" => self.strategy.eval_order = parse_named(key, value)?,
            "seed" => self.seed = parse(key, value, "an unsigned integer")?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = parse_named(key, value)?,
            "s1.min_drop" => self.strategy.s1_min_drop = parse(key, value, "a non-negative real")?,
            "ddm.min_n" => d.ddm.min_n = parse(key, value, "a positive integer")?,
            "eddm.alpha" => d.eddm.alpha = parse(key, value, "a real in (0, 1]")?,
            "eddm.beta" => d.eddm.beta = parse(key, value, "a real in (0, 1]")?,
            "eddm.min_errors" => d.eddm.min_errors = parse(key, value, "a positive integer")?,
            "adwin.delta" => d.adwin.delta = parse(key, value, "a real in (0, 1)")?,
            "adwin.max_buckets" => d.adwin.max_buckets = parse(key, value, "a positive integer")?,
            "nb.var_floor" => p.nb.var_floor = parse(key, value, "a positive real")?,
            "knn.window" => p.knn.window = parse(key, value, "a positive integer")?,
            "knn.k" => p.knn.k = parse(key, value, "a positive integer")?,
            "hat.drift_delta" => p.hat.drift_delta = parse(key, value, "a real in (0, 1)")?,
            "hat.warning_delta" => p.hat.warning_delta = parse(key, value, "a real in (0, 1)")?,
            "arf.trees" => p.arf.trees = parse(key, value, "a positive integer")?,
            "arf.lambda" => p.arf.lambda = parse(key, value, "a positive real")?,
            "arf.subspace" => p.arf.subspace = parse_subspace(key, value)?,
            "arf.resampling" => {
                p.arf.resampling = match value.trim().to_ascii_lowercase().as_str() {
                    "poisson" => Resampling::Poisson,
                    "unit" => Resampling::Unit,
                    _ => return Err(Error::config(key, format!("`{value}` is not valid (expected poisson or unit)"))),
                }
            }
            "arf.detectors" => p.arf.detectors = parse_bool(key, value)?,
            "arf.warning_delta" => p.arf.warning_delta = parse(key, value, "a real in (0, 1)")?,
            "arf.drift_delta" => p.arf.drift_delta = parse(key, value, "a real in (0, 1)")?,
            "arf.delta" => p.arf.tree.delta = parse(key, value, "a real in (0, 1)")?,
            "arf.grace" => p.arf.tree.grace = parse(key, value, "a positive real")?,
            "awe.capacity" => p.awe.capacity = parse(key, value, "a positive integer")?,
            "awe.base" => p.awe.base.kind = parse_named::<BaseKind>(key, value)?,
            "dwm.beta" => p.dwm.beta = parse(key, value, "a real in (0, 1)")?,
            "dwm.theta" => p.dwm.theta = parse(key, value, "a real in [0, 1)")?,
            "dwm.period" => p.dwm.period = parse(key, value, "a positive integer")?,
            "dwm.max_experts" => p.dwm.max_experts = parse(key, value, "a positive integer")?,
            "dwm.base" => p.dwm.base.kind = parse_named::<BaseKind>(key, value)?,
            "addexp.beta" => p.addexp.beta = parse(key, value, "a real in (0, 1)")?,
            "addexp.gamma" => p.addexp.gamma = parse(key, value, "a positive real")?,
            "addexp.max_experts" => p.addexp.max_experts = parse(key, value, "a positive integer")?,
            "addexp.base" => p.addexp.base.kind = parse_named::<BaseKind>(key, value)?,
            "bic.window" => p.bic.window = parse(key, value, "a positive integer")?,
            "bic.base" => p.bic.base.kind = parse_named::<BaseKind>(key, value)?,
            "synth.kind" => {
                let kind = value.trim().to_ascii_lowercase();
                if kind != "means" && kind != "xor2" {
                    return Err(Error::config(key, format!("`{value}` is not valid (expected means or xor2)")));
                }
                self.synth_kind = kind;
            }
            "synth.n_instances" => self.synth.n_instances = parse(key, value, "a positive integer")?,
            "synth.n_features" => self.synth.n_features = parse(key, value, "a positive integer")?,
            "synth.drift_points" => {
                self.synth.drift_points = parse_list(key, value, "comma-separated instance indices")?
            }
            "synth.concepts" => {
                let concepts = value
                    .split(',')
                    .map(|c| parse_named::<Concept>(key, c))
                    .collect::<Result<Vec<_>>>()?;
                self.synth_concepts = Some(concepts);
            }
            "synth.noise_rate" => self.synth.noise_rate = parse(key, value, "a real in [0, 0.5)")?,
            "synth.positive_rate" => self.synth.positive_rate = parse(key, value, "a real in (0, 1)")?,
            "synth.separation" => self.synth.separation = parse(key, value, "a non-negative real")?,
            "synth.seed" => self.synth_seed = Some(parse(key, value, "an unsigned integer")?),
            _ => {
                let handled = match key.split_once('.') {
                    Some(("ht", field)) => set_tree(&mut p.ht, field, key, value)?,
                    Some(("vfdt", field)) => set_tree(&mut p.vfdt, field, key, value)?,
                    Some(("hat", field)) => set_tree(&mut p.hat.tree, field, key, value)?,
                    _ => false,
                };
                if !handled {
                    return Err(unknown_key(key));
                }
            }
        }
        Ok(())
    }

    /// Synthetic spec with seed and concept defaults resolved.
    pub fn synthetic_spec(&self) -> SyntheticStreamSpec {
        let mut spec = self.synth.clone();
        spec.seed = self.synth_seed.unwrap_or(self.seed);
        spec.concepts = match &self.synth_concepts {
            Some(c) => c.clone(),
            None => {
                let (a, b) = if self.synth_kind == "xor2" {
                    (Concept::Xor2, Concept::Xor2Flipped)
                } else {
                    (Concept::Means, Concept::MeansFlipped)
                };
                (0..=spec.drift_points.len())
                    .map(|s| if s % 2 == 0 { a } else { b })
                    .collect()
            }
        };
        spec
    }

    pub fn source(&self) -> Result<DataSource> {
        Ok(match &self.data {
            Some(path) => DataSource::Csv {
                schema: DatasetSchema::from_header(path, &self.label_col, &self.positive_label)?,
                path: path.clone(),
            },
            None => {
                let spec = self.synthetic_spec();
                spec.validate()?;
                DataSource::Synthetic(spec)
            }
        })
    }

    /// Checks everything that can be checked without reading data.
    pub fn validate(&self) -> Result<()> {
        self.split.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::config(key, message),
            other => other,
        })?;
        if self.data.is_none() {
            self.synthetic_spec().validate()?;
        }
        Ok(())
    }

    pub fn run_spec(&self) -> Result<RunSpec> {
        self.validate()?;
        Ok(RunSpec {
            source: self.source()?,
            model: self.model,
            params: self.params,
            strategy: self.strategy,
            split: SplitSpec {
                seed: self.seed,
                ..self.split
            },
            seed: self.seed,
        })
    }
}
