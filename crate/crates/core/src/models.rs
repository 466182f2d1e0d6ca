//! Model kinds and construction from parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learners::addexp::{AddExpModel, AddExpParams};
use crate::learners::arf::{AdaptiveRandomForest, ArfParams};
use crate::learners::awe::{AweModel, AweParams};
use crate::learners::bic::{BicModel, BicParams};
use crate::learners::dwm::{DwmModel, DwmParams};
use crate::learners::hat::{HatParams, HoeffdingAdaptiveTree};
use crate::learners::hoeffding::HoeffdingTree;
use crate::learners::knn::{KnnParams, KnnWindow};
use crate::learners::nb::{GaussianNb, NbParams};
use crate::learners::rules::RuleSet;
use crate::learners::split::TreeParams;
use crate::learners::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Nb,
    Knn,
    Arf,
    Vfdt,
    Ht,
    Hat,
    Awe,
    Bic,
    Dwmc,
    Aeec,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Nb,
        ModelKind::Knn,
        ModelKind::Arf,
        ModelKind::Vfdt,
        ModelKind::Ht,
        ModelKind::Hat,
        ModelKind::Awe,
        ModelKind::Bic,
        ModelKind::Dwmc,
        ModelKind::Aeec,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::Knn => "knn",
            ModelKind::Arf => "arf",
            ModelKind::Vfdt => "vfdt",
            ModelKind::Ht => "ht",
            ModelKind::Hat => "hat",
            ModelKind::Awe => "awe",
            ModelKind::Bic => "bic",
            ModelKind::Dwmc => "dwmc",
            ModelKind::Aeec => "aeec",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(ModelKind::as_str).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let name = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == name)
            .ok_or_else(|| format!("unknown model `{s}` (expected one of {})", Self::valid_names()))
    }
}

/// Hyperparameters for every model kind; only the chosen kind's part is read.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub nb: NbParams,
    pub knn: KnnParams,
    pub ht: TreeParams,
    pub vfdt: TreeParams,
    pub hat: HatParams,
    pub arf: ArfParams,
    pub awe: AweParams,
    pub dwm: DwmParams,
    pub addexp: AddExpParams,
    pub bic: BicParams,
}

pub fn build_model(kind: ModelKind, params: &ModelParams, n_features: usize, seed: u64) -> Result<Box<dyn Classifier>> {
    Ok(match kind {
        ModelKind::Nb => Box::new(GaussianNb::new(n_features, params.nb)),
        ModelKind::Knn => Box::new(KnnWindow::new(n_features, params.knn)),
        ModelKind::Arf => Box::new(AdaptiveRandomForest::new(n_features, params.arf, seed)?),
        ModelKind::Vfdt => Box::new(RuleSet::new(n_features, params.vfdt)),
        ModelKind::Ht => Box::new(HoeffdingTree::new(n_features, params.ht)),
        ModelKind::Hat => Box::new(HoeffdingAdaptiveTree::new(n_features, params.hat)),
        ModelKind::Awe => Box::new(AweModel::new(n_features, params.awe)?),
        ModelKind::Bic => Box::new(BicModel::new(n_features, params.bic)?),
        ModelKind::Dwmc => Box::new(DwmModel::new(n_features, params.dwm)?),
        ModelKind::Aeec => Box::new(AddExpModel::new(n_features, params.addexp)?),
    })
}
