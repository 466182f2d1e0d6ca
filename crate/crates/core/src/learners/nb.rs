//! Incremental Gaussian Naive Bayes with Welford accumulators.

use serde::{Deserialize, Serialize};

use super::{check_batch, check_dim, Classifier};
use crate::data::LabeledBatch;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub var_floor: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: f64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.push_weighted(x, 1.0);
    }

    /// Weighted update; weight `w` is equivalent to `w` repeated pushes.
    pub fn push_weighted(&mut self, x: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        self.n += w;
        let delta = x - self.mean;
        self.mean += delta * w / self.n;
        self.m2 += w * delta * (x - self.mean);
    }

    /// Sample variance (n - 1 denominator); zero below two observations.
    pub fn sample_variance(&self) -> f64 {
        if self.n > 1.0 {
            (self.m2 / (self.n - 1.0)).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.sample_variance().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    params: NbParams,
    n_features: usize,
    class_counts: [u64; 2],
    stats: [Vec<Welford>; 2],
}

impl GaussianNb {
    pub fn new(n_features: usize, params: NbParams) -> Self {
        Self {
            params,
            n_features,
            class_counts: [0; 2],
            stats: [vec![Welford::default(); n_features], vec![Welford::default(); n_features]],
        }
    }

    pub fn class_counts(&self) -> [u64; 2] {
        self.class_counts
    }

    pub fn mean(&self, class: usize, feature: usize) -> f64 {
        self.stats[class][feature].mean
    }

    pub fn variance(&self, class: usize, feature: usize) -> f64 {
        self.stats[class][feature]
            .sample_variance()
            .max(self.params.var_floor)
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        let c = label as usize;
        self.class_counts[c] += 1;
        for (acc, &x) in self.stats[c].iter_mut().zip(features) {
            acc.push(x);
        }
    }

    pub fn learn_one(&mut self, features: &[f64], label: u8) -> Result<()> {
        check_dim(self.n_features, features.len())?;
        self.learn(features, label);
        Ok(())
    }

    /// Log prior plus summed log Gaussian densities, per class. `None` until
    /// both classes have been seen twice.
    pub fn log_joint(&self, features: &[f64]) -> Option<[f64; 2]> {
        if self.class_counts.iter().any(|&c| c < 2) {
            return None;
        }
        let total = (self.class_counts[0] + self.class_counts[1]) as f64;
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut lp = (self.class_counts[c] as f64 / total).ln();
            for (j, &x) in features.iter().enumerate() {
                let var = self.variance(c, j);
                let d = x - self.stats[c][j].mean;
                lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var);
            }
            *slot = lp;
        }
        Some(out)
    }

    pub fn scores(&self, features: &[f64]) -> [f64; 2] {
        match self.log_joint(features) {
            Some([l0, l1]) => {
                let m = l0.max(l1);
                super::normalize([(l0 - m).exp(), (l1 - m).exp()])
            }
            None => {
                // majority class until likelihoods are defined
                let [n0, n1] = self.class_counts;
                if n1 > n0 {
                    [0.0, 1.0]
                } else {
                    [1.0, 0.0]
                }
            }
        }
    }

    pub fn predict(&self, features: &[f64]) -> u8 {
        match self.log_joint(features) {
            Some([l0, l1]) => u8::from(l1 > l0),
            None => super::vote_label(self.scores(features)),
        }
    }
}

impl Classifier for GaussianNb {
    fn name(&self) -> &'static str {
        "nb"
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
        Ok(self.scores(features))
    }

    fn predict_one(&self, features: &[f64]) -> Result<u8> {
        check_dim(self.n_features, features.len())?;
        Ok(self.predict(features))
    }

    fn clone_for_run(&self) -> Box<dyn Classifier> {
        Box::new(self.clone())
    }
}
