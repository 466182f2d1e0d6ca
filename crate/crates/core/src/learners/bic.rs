//! Batch-incremental classifier: a window of models each frozen after the
//! one batch it was trained on.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::experts::{weighted_vote, BaseParams, Expert};
use super::{check_batch, check_dim, Classifier};
use crate::data::LabeledBatch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicParams {
    pub window: usize,
    pub base: BaseParams,
}

impl Default for BicParams {
    fn default() -> Self {
        Self {
            window: 10,
            base: BaseParams::small_tree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicModel {
    params: BicParams,
    n_features: usize,
    /// Oldest first, paired with the batch index each was trained on.
    members: VecDeque<(usize, Expert)>,
}

impl BicModel {
    pub fn new(n_features: usize, params: BicParams) -> Result<Self> {
        if params.window == 0 {
            return Err(Error::config("bic.window", "must be at least 1"));
        }
        Ok(Self {
            params,
            n_features,
            members: VecDeque::new(),
        })
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, &Expert)> {
        self.members.iter().map(|(b, e)| (*b, e))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn votes(&self, features: &[f64]) -> [f64; 2] {
        weighted_vote(self.members.iter().map(|(_, e)| (e, 1.0)), features)
    }
}

impl Classifier for BicModel {
    fn name(&self) -> &'static str {
        "bic"
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn learn_batch(&mut self, batch: &LabeledBatch) -> Result<()> {
        check_batch(self.n_features, &batch.instances)?;
        let mut expert = Expert::new(self.n_features, &self.params.base);
        for inst in &batch.instances {
            expert.learn(&inst.features, inst.label);
        }
        self.members.push_back((batch.index, expert));
        while self.members.len() > self.params.window {
            self.members.pop_front();
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
