//! Additive expert ensemble with weakest-expert pruning.

use serde::{Deserialize, Serialize};

use super::dwm::argmin_weight;
use super::experts::{weighted_vote, BaseParams, Expert};
use super::{check_batch, check_dim, vote_label, Classifier};
use crate::data::LabeledBatch;
use crate::error::{Error, Result};

/// Weights are rescaled once the largest falls below this, keeping them
/// strictly positive over long streams.
const RESCALE_BELOW: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AddExpParams {
    pub beta: f64,
    pub gamma: f64,
    pub max_experts: usize,
    pub base: BaseParams,
}

impl Default for AddExpParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            gamma: 0.1,
            max_experts: 10,
            base: BaseParams::nb(),
        }
    }
}

impl AddExpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::config("addexp.beta", "must be in (0, 1)"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::config("addexp.gamma", "must be > 0"));
        }
        if self.max_experts == 0 {
            return Err(Error::config("addexp.max_experts", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddExpModel {
    params: AddExpParams,
    n_features: usize,
    experts: Vec<(Expert, f64)>,
    additions: usize,
    evictions: usize,
}

impl AddExpModel {
    pub fn new(n_features: usize, params: AddExpParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            n_features,
            experts: vec![(Expert::new(n_features, &params.base), 1.0)],
            additions: 0,
            evictions: 0,
        })
    }

    /// Replaces the expert pool (for inspection and tests).
    pub fn with_experts(mut self, experts: Vec<(Expert, f64)>) -> Self {
        assert!(!experts.is_empty(), "at least one expert");
        self.experts = experts;
        self
    }

    pub fn experts(&self) -> &[(Expert, f64)] {
        &self.experts
    }

    pub fn weights(&self) -> Vec<f64> {
        self.experts.iter().map(|(_, w)| *w).collect()
    }

    pub fn additions(&self) -> usize {
        self.additions
    }

    pub fn evictions(&self) -> usize {
        self.evictions
    }

    pub fn votes(&self, features: &[f64]) -> [f64; 2] {
        weighted_vote(self.experts.iter().map(|(e, w)| (e, *w)), features)
    }

    /// Penalizes wrong experts, then adds a new expert with weight
    /// `gamma * total` (total taken after the penalties) if the vote was wrong.
    pub fn learn(&mut self, features: &[f64], label: u8) {
        let global = vote_label(self.votes(features));
        for (e, w) in &mut self.experts {
            if e.predict(features) != label {
                *w *= self.params.beta;
            }
        }
        if global != label {
            let total: f64 = self.experts.iter().map(|(_, w)| *w).sum();
            if self.experts.len() >= self.params.max_experts {
                let weakest = argmin_weight(&self.experts);
                self.experts.remove(weakest);
                self.evictions += 1;
            }
            let expert = Expert::new(self.n_features, &self.params.base);
            self.experts.push((expert, self.params.gamma * total));
            self.additions += 1;
        }
        let max = self.experts.iter().map(|(_, w)| *w).fold(0.0, f64::max);
        if max < RESCALE_BELOW {
            for (_, w) in &mut self.experts {
                *w /= max;
            }
        }
        for (e, _) in &mut self.experts {
            e.learn(features, label);
        }
    }
}

impl Classifier for AddExpModel {
    fn name(&self) -> &'static str {
        "aeec"
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
