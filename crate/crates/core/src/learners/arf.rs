//! Adaptive random forest: Hoeffding trees on random feature subspaces,
//! trained with Poisson instance weights, each guarded by warning and drift
//! detectors with background-tree replacement.

use rand::seq::index::sample;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::hoeffding::HoeffdingTree;
use super::split::TreeParams;
use super::{check_batch, check_dim, Classifier};
use crate::data::LabeledBatch;
use crate::drift::{Adwin, AdwinParams};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Subspace {
    /// `ceil(sqrt(n_features))` features per tree.
    Sqrt,
    Count(usize),
    Full,
}

impl Subspace {
    pub fn size(&self, n_features: usize) -> usize {
        match *self {
            Subspace::Sqrt => ((n_features as f64).sqrt().ceil() as usize).max(1),
            Subspace::Count(k) => k.clamp(1, n_features),
            Subspace::Full => n_features,
        }
        .min(n_features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resampling {
    /// Instance weight drawn from Poisson(lambda).
    Poisson,
    /// Every instance weighs 1.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArfParams {
    pub trees: usize,
    pub lambda: f64,
    pub subspace: Subspace,
    pub resampling: Resampling,
    pub detectors: bool,
    pub warning_delta: f64,
    pub drift_delta: f64,
    pub tree: TreeParams,
}

impl Default for ArfParams {
    fn default() -> Self {
        Self {
            trees: 10,
            lambda: 6.0,
            subspace: Subspace::Sqrt,
            resampling: Resampling::Poisson,
            detectors: true,
            warning_delta: 0.01,
            drift_delta: 0.001,
            tree: TreeParams {
                grace: 50.0,
                delta: 0.01,
                ..TreeParams::default()
            },
        }
    }
}

/// One Poisson(lambda) replication count.
pub fn poisson_weight(rng: &mut StreamRng, lambda: f64) -> f64 {
    match Poisson::new(lambda) {
        Ok(dist) => dist.sample(rng),
        Err(_) => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Member {
    tree: HoeffdingTree,
    background: Option<HoeffdingTree>,
    warning: Adwin,
    drift: Adwin,
    rng: StreamRng,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRandomForest {
    params: ArfParams,
    n_features: usize,
    members: Vec<Member>,
    replacements: usize,
    backgrounds_started: usize,
}

impl AdaptiveRandomForest {
    pub fn new(n_features: usize, params: ArfParams, seed: u64) -> Result<Self> {
        if params.trees == 0 {
            return Err(Error::config("arf.trees", "must be at least 1"));
        }
        if params.resampling == Resampling::Poisson && !(params.lambda > 0.0) {
            return Err(Error::config("arf.lambda", "must be > 0"));
        }
        let members = (0..params.trees)
            .map(|slot| {
                let mut rng = rng_from_seed(derive_seed(seed, slot as u64));
                let tree = Self::fresh_tree(n_features, &params, &mut rng);
                Member {
                    tree,
                    background: None,
                    warning: Self::detector(params.warning_delta),
                    drift: Self::detector(params.drift_delta),
                    rng,
                }
            })
            .collect();
        Ok(Self {
            params,
            n_features,
            members,
            replacements: 0,
            backgrounds_started: 0,
        })
    }

    fn detector(delta: f64) -> Adwin {
        Adwin::new(AdwinParams {
            delta,
            ..AdwinParams::default()
        })
    }

    fn fresh_tree(n_features: usize, params: &ArfParams, rng: &mut StreamRng) -> HoeffdingTree {
        let m = params.subspace.size(n_features);
        if m >= n_features {
            HoeffdingTree::new(n_features, params.tree)
        } else {
            let mut subset = sample(rng, n_features, m).into_vec();
            subset.sort_unstable();
            HoeffdingTree::with_feature_subset(n_features, params.tree, subset)
        }
    }

    pub fn trees(&self) -> impl Iterator<Item = &HoeffdingTree> {
        self.members.iter().map(|m| &m.tree)
    }

    pub fn tree_count(&self) -> usize {
        self.members.len()
    }

    pub fn background_count(&self) -> usize {
        self.members.iter().filter(|m| m.background.is_some()).count()
    }

    pub fn replacements(&self) -> usize {
        self.replacements
    }

    pub fn backgrounds_started(&self) -> usize {
        self.backgrounds_started
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        let params = self.params;
        for member in &mut self.members {
            let error = f64::from(u8::from(member.tree.predict(features) != label));
            let weight = match params.resampling {
                Resampling::Poisson => poisson_weight(&mut member.rng, params.lambda),
                Resampling::Unit => 1.0,
            };
            if weight > 0.0 {
                member.tree.learn_weighted(features, label, weight);
                if let Some(bg) = member.background.as_mut() {
                    bg.learn_weighted(features, label, weight);
                }
            }
            if !params.detectors {
                continue;
            }
            if member.warning.insert_detect_increase(error) {
                member.warning = Self::detector(params.warning_delta);
                if member.background.is_none() {
                    member.background = Some(Self::fresh_tree(self.n_features, &params, &mut member.rng));
                    self.backgrounds_started += 1;
                }
            }
            if member.drift.insert_detect_increase(error) {
                member.tree = match member.background.take() {
                    Some(bg) => bg,
                    None => Self::fresh_tree(self.n_features, &params, &mut member.rng),
                };
                member.warning = Self::detector(params.warning_delta);
                member.drift = Self::detector(params.drift_delta);
                self.replacements += 1;
            }
        }
    }

    /// Unweighted label votes of the foreground trees.
    pub fn votes(&self, features: &[f64]) -> [f64; 2] {
        let mut votes = [0.0; 2];
        for m in &self.members {
            votes[m.tree.predict(features) as usize] += 1.0;
        }
        votes
    }

    /// Draws the next replication weight from tree `slot`'s generator, for
    /// inspecting the resampling distribution.
    pub fn sample_weight(&mut self, slot: usize) -> f64 {
        let lambda = self.params.lambda;
        let rng = &mut self.members[slot].rng;
        match self.params.resampling {
            Resampling::Poisson => poisson_weight(rng, lambda),
            Resampling::Unit => 1.0,
        }
    }
}

impl Classifier for AdaptiveRandomForest {
    fn name(&self) -> &'static str {
        "arf"
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn learn_batch(&mut self, batch: &LabeledBatch) -> Result<()> {
        check_batch(self.n_features, &batch.instances)?;
        for inst in &batch.instances {
            self.learn(&inst.features, inst.label);
        }
        Ok(())
    }

    fn predict_scores(&self, features: &[f64]) -> Result<[f64; 2]> {
        check_dim(self.n_features, features.len())?;
        Ok(self.votes(features))
    }

    fn clone_for_run(&self) -> Box<dyn Classifier> {
        Box::new(self.clone())
    }
}
