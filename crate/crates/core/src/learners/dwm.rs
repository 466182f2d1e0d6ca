//! Dynamic weighted majority.

use serde::{Deserialize, Serialize};

use super::experts::{weighted_vote, BaseParams, Expert};
use super::{check_batch, check_dim, vote_label, Classifier};
use crate::data::LabeledBatch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwmParams {
    pub beta: f64,
    pub theta: f64,
    /// Instances between weight updates.
    pub period: u64,
    pub max_experts: usize,
    pub base: BaseParams,
}

impl Default for DwmParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            theta: 0.01,
            period: 50,
            max_experts: 10,
            base: BaseParams::nb(),
        }
    }
}

impl DwmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::config("dwm.beta", "must be in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::config("dwm.theta", "must be in [0, 1)"));
        }
        if self.period == 0 {
            return Err(Error::config("dwm.period", "must be at least 1"));
        }
        if self.max_experts == 0 {
            return Err(Error::config("dwm.max_experts", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwmModel {
    params: DwmParams,
    n_features: usize,
    experts: Vec<(Expert, f64)>,
    seen: u64,
    additions: usize,
    removals: usize,
}

impl DwmModel {
    pub fn new(n_features: usize, params: DwmParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            n_features,
            experts: vec![(Expert::new(n_features, &params.base), 1.0)],
            seen: 0,
            additions: 0,
            removals: 0,
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

    pub fn removals(&self) -> usize {
        self.removals
    }

    pub fn votes(&self, features: &[f64]) -> [f64; 2] {
        weighted_vote(self.experts.iter().map(|(e, w)| (e, *w)), features)
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        let predictions: Vec<u8> = self.experts.iter().map(|(e, _)| e.predict(features)).collect();
        let global = vote_label(self.votes(features));
        self.seen += 1;
        if self.seen % self.params.period == 0 {
            for ((_, w), &p) in self.experts.iter_mut().zip(&predictions) {
                if p != label {
                    *w *= self.params.beta;
                }
            }
            let max = self.experts.iter().map(|(_, w)| *w).fold(0.0, f64::max);
            for (_, w) in &mut self.experts {
                *w /= max;
            }
            let before = self.experts.len();
            let theta = self.params.theta;
            self.experts.retain(|(_, w)| *w >= theta);
            self.removals += before - self.experts.len();
            if global != label {
                if self.experts.len() >= self.params.max_experts {
                    let weakest = argmin_weight(&self.experts);
                    self.experts.remove(weakest);
                    self.removals += 1;
                }
                self.experts.push((Expert::new(self.n_features, &self.params.base), 1.0));
                self.additions += 1;
            }
        }
        for (e, _) in &mut self.experts {
            e.learn(features, label);
        }
    }
}

/// Index of the lowest weight; the earliest expert wins ties.
pub(crate) fn argmin_weight(experts: &[(Expert, f64)]) -> usize {
    let mut best = 0;
    for (i, (_, w)) in experts.iter().enumerate() {
        if *w < experts[best].1 {
            best = i;
        }
    }
    best
}

impl Classifier for DwmModel {
    fn name(&self) -> &'static str {
        "dwmc"
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
