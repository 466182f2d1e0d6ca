//! Accuracy-weighted ensemble over chunk-trained members.

use serde::{Deserialize, Serialize};

use super::experts::{weighted_vote, BaseParams, Expert};
use super::{check_batch, check_dim, Classifier};
use crate::data::{Instance, LabeledBatch};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AweParams {
    pub capacity: usize,
    pub base: BaseParams,
}

impl Default for AweParams {
    fn default() -> Self {
        Self {
            capacity: 10,
            base: BaseParams::small_tree(),
        }
    }
}

/// Mean squared error of a random classifier that predicts with the chunk's
/// class priors: `sum_c p(c) (1 - p(c))^2`.
pub fn baseline_mse(class_counts: [usize; 2]) -> f64 {
    let total = (class_counts[0] + class_counts[1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * (1.0 - p) * (1.0 - p)
        })
        .sum()
}

/// Mean over the chunk of `(1 - score(true class))^2`.
pub fn member_mse(chunk: &[Instance], score: impl Fn(&[f64]) -> [f64; 2]) -> f64 {
    if chunk.is_empty() {
        return 0.0;
    }
    chunk
        .iter()
        .map(|inst| {
            let s = score(&inst.features)[inst.label as usize];
            (1.0 - s) * (1.0 - s)
        })
        .sum::<f64>()
        / chunk.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AweModel {
    params: AweParams,
    n_features: usize,
    members: Vec<(Expert, f64)>,
    prior: [usize; 2],
}

impl AweModel {
    pub fn new(n_features: usize, params: AweParams) -> Result<Self> {
        if params.capacity == 0 {
            return Err(Error::config("awe.capacity", "must be at least 1"));
        }
        Ok(Self {
            params,
            n_features,
            members: Vec::new(),
            prior: [0; 2],
        })
    }

    pub fn members(&self) -> &[(Expert, f64)] {
        &self.members
    }

    /// Adds pre-trained members with given weights (for inspection and tests).
    pub fn with_members(mut self, members: Vec<(Expert, f64)>) -> Self {
        self.members = members;
        self
    }

    /// Trains a new member on `chunk`, re-weights every member on it and
    /// keeps the `capacity` best non-negative ones. Chunks missing a class
    /// only update the running class prior.
    pub fn update_chunk(&mut self, chunk: &[Instance]) {
        let mut counts = [0usize; 2];
        for inst in chunk {
            counts[inst.label as usize] += 1;
        }
        self.prior[0] += counts[0];
        self.prior[1] += counts[1];
        if counts.contains(&0) {
            return;
        }
        let mut fresh = Expert::new(self.n_features, &self.params.base);
        for inst in chunk {
            fresh.learn(&inst.features, inst.label);
        }
        let mse_r = baseline_mse(counts);
        let mut candidates: Vec<(Expert, f64)> = self
            .members
            .drain(..)
            .map(|(e, _)| e)
            .chain(std::iter::once(fresh))
            .map(|e| {
                let w = mse_r - member_mse(chunk, |x| e.scores(x));
                (e, w)
            })
            .filter(|(_, w)| *w >= 0.0)
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
        candidates.truncate(self.params.capacity);
        self.members = candidates;
    }

    pub fn votes(&self, features: &[f64]) -> [f64; 2] {
        let votes = weighted_vote(self.members.iter().map(|(e, w)| (e, *w)), features);
        if votes[0] + votes[1] > 0.0 {
            votes
        } else {
            [self.prior[0] as f64, self.prior[1] as f64]
        }
    }
}

impl Classifier for AweModel {
    fn name(&self) -> &'static str {
        "awe"
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn learn_batch(&mut self, batch: &LabeledBatch) -> Result<()> {
        check_batch(self.n_features, &batch.instances)?;
        self.update_chunk(&batch.instances);
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
