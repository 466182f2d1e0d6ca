//! Base learners used as ensemble members.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::hoeffding::HoeffdingTree;
use super::nb::{GaussianNb, NbParams};
use super::split::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseKind {
    Nb,
    Ht,
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseKind::Nb => "nb",
            BaseKind::Ht => "ht",
        })
    }
}

impl FromStr for BaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nb" => Ok(BaseKind::Nb),
            "ht" => Ok(BaseKind::Ht),
            other => Err(format!("unknown base learner `{other}` (expected nb or ht)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub kind: BaseKind,
    pub nb: NbParams,
    pub tree: TreeParams,
}

impl BaseParams {
    pub fn nb() -> Self {
        Self {
            kind: BaseKind::Nb,
            nb: NbParams::default(),
            tree: TreeParams::default(),
        }
    }

    /// Hoeffding tree with a grace period short enough to split within one batch.
    pub fn small_tree() -> Self {
        Self {
            kind: BaseKind::Ht,
            nb: NbParams::default(),
            tree: TreeParams {
                grace: 50.0,
                ..TreeParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expert {
    Nb(GaussianNb),
    Ht(HoeffdingTree),
}

impl Expert {
    pub fn new(n_features: usize, params: &BaseParams) -> Self {
        match params.kind {
            BaseKind::Nb => Expert::Nb(GaussianNb::new(n_features, params.nb)),
            BaseKind::Ht => Expert::Ht(HoeffdingTree::new(n_features, params.tree)),
        }
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        match self {
            Expert::Nb(m) => m.learn(features, label),
            Expert::Ht(m) => m.learn(features, label),
        }
    }

    /// Class-probability estimate: posterior for NB, leaf frequencies for HT.
    pub fn scores(&self, features: &[f64]) -> [f64; 2] {
        match self {
            Expert::Nb(m) => m.scores(features),
            Expert::Ht(m) => m.scores(features),
        }
    }

    pub fn predict(&self, features: &[f64]) -> u8 {
        match self {
            Expert::Nb(m) => m.predict(features),
            Expert::Ht(m) => m.predict(features),
        }
    }
}

/// Weighted label vote; each member adds its weight to the class it predicts.
pub fn weighted_vote<'a>(members: impl IntoIterator<Item = (&'a Expert, f64)>, features: &[f64]) -> [f64; 2] {
    let mut votes = [0.0; 2];
    for (expert, weight) in members {
        votes[expert.predict(features) as usize] += weight;
    }
    votes
}
