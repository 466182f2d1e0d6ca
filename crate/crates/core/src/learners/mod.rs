//! Incremental classifiers behind one contract.

pub mod addexp;
pub mod arf;
pub mod awe;
pub mod bic;
pub mod dwm;
pub mod experts;
pub mod hat;
pub mod hoeffding;
pub mod knn;
pub mod nb;
pub mod rules;
pub mod split;

use std::fmt;

use crate::data::{Instance, LabeledBatch};
use crate::error::{Error, Result};

/// Capability shared by every model: batch-incremental learning and
/// non-mutating prediction.
pub trait Classifier: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn n_features(&self) -> usize;

    /// Updates the model with the batch, in instance order.
    fn learn_batch(&mut self, batch: &LabeledBatch) -> Result<()>;

    /// Non-negative class scores `[negative, positive]`.
    fn predict_scores(&self, features: &[f64]) -> Result<[f64; 2]>;

    /// Positive only when its score strictly exceeds the negative score.
    fn predict_one(&self, features: &[f64]) -> Result<u8> {
        Ok(vote_label(self.predict_scores(features)?))
    }

    fn clone_for_run(&self) -> Box<dyn Classifier>;
}

impl Clone for Box<dyn Classifier> {
    fn clone(&self) -> Self {
        self.clone_for_run()
    }
}

/// Ties resolve to the negative class.
pub fn vote_label(scores: [f64; 2]) -> u8 {
    u8::from(scores[1] > scores[0])
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn check_batch(expected: usize, instances: &[Instance]) -> Result<()> {
    instances
        .iter()
        .try_for_each(|i| check_dim(expected, i.features.len()))
}

/// Normalizes non-negative scores to sum to one; all-zero stays all-zero.
pub(crate) fn normalize(scores: [f64; 2]) -> [f64; 2] {
    let total = scores[0] + scores[1];
    if total > 0.0 {
        [scores[0] / total, scores[1] / total]
    } else {
        [0.0, 0.0]
    }
}
