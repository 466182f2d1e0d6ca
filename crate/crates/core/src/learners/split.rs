//! Leaf statistics and Hoeffding split evaluation shared by the tree and
//! rule learners.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Confidence of the Hoeffding bound.
    pub delta: f64,
    /// Tie threshold: split anyway once the bound drops below it.
    pub tau: f64,
    /// Weight a leaf must see between split attempts.
    pub grace: f64,
    pub max_depth: usize,
    /// Candidate thresholds per feature per attempt.
    pub split_candidates: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            delta: 1e-7,
            tau: 0.05,
            grace: 200.0,
            max_depth: 20,
            split_candidates: 10,
        }
    }
}

/// `sqrt(R^2 ln(1/delta) / (2n))`.
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> Result<f64> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::InvalidArgument(format!("range must be > 0, got {range}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must be in (0, 1], got {delta}")));
    }
    if !(n >= 1.0) {
        return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt())
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Binary entropy in bits of a class-weight pair.
pub fn entropy(weights: [f64; 2]) -> f64 {
    let total = weights[0] + weights[1];
    if total <= 0.0 {
        return 0.0;
    }
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

/// Information gain of partitioning `parent` into `left` and `right`.
pub fn info_gain(parent: [f64; 2], left: [f64; 2], right: [f64; 2]) -> f64 {
    let total = parent[0] + parent[1];
    if total <= 0.0 {
        return 0.0;
    }
    let wl = left[0] + left[1];
    let wr = right[0] + right[1];
    entropy(parent) - (wl / total) * entropy(left) - (wr / total) * entropy(right)
}

/// Weighted Gaussian summary of one feature within one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEstimator {
    pub weight: f64,
    pub mean: f64,
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for GaussianEstimator {
    fn default() -> Self {
        Self {
            weight: 0.0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl GaussianEstimator {
    pub fn observe(&mut self, x: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        self.weight += w;
        let delta = x - self.mean;
        self.mean += delta * w / self.weight;
        self.m2 += w * delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn std_dev(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0).sqrt()
        } else {
            0.0
        }
    }

    /// Unclamped Gaussian CDF at `t`.
    fn cdf(&self, t: f64) -> f64 {
        let sd = self.std_dev();
        if sd > 0.0 {
            normal_cdf((t - self.mean) / sd)
        } else if t >= self.mean {
            1.0
        } else {
            0.0
        }
    }

    /// Estimated weight of observations `<= t`, clamped by the observed range.
    pub fn weight_at_or_below(&self, t: f64) -> f64 {
        if self.weight <= 0.0 || t < self.min {
            0.0
        } else if t >= self.max {
            self.weight
        } else {
            self.weight * self.cdf(t)
        }
    }
}

/// Class counts plus per-class, per-feature Gaussian estimators of a leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitStats {
    pub class_weights: [f64; 2],
    pub features: Vec<[GaussianEstimator; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    /// Estimated class weights with `x[feature] <= threshold`.
    pub left: [f64; 2],
    pub right: [f64; 2],
}

/// Outcome of one split attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecision {
    pub best: Option<SplitCandidate>,
    pub g_best: f64,
    /// Gain of the runner-up feature, or of the null split (0).
    pub g_second: f64,
    pub epsilon: f64,
    pub n: f64,
    pub split: bool,
}

impl SplitStats {
    pub fn new(n_features: usize) -> Self {
        Self::with_prior(n_features, [0.0; 2])
    }

    pub fn with_prior(n_features: usize, class_weights: [f64; 2]) -> Self {
        Self {
            class_weights,
            features: vec![[GaussianEstimator::default(); 2]; n_features],
        }
    }

    pub fn observe(&mut self, features: &[f64], label: u8, weight: f64) {
        let c = label as usize;
        self.class_weights[c] += weight;
        for (est, &x) in self.features.iter_mut().zip(features) {
            est[c].observe(x, weight);
        }
    }

    pub fn total(&self) -> f64 {
        self.class_weights[0] + self.class_weights[1]
    }

    pub fn is_pure(&self) -> bool {
        self.class_weights.iter().filter(|&&w| w > 0.0).count() < 2
    }

    pub fn majority(&self) -> u8 {
        super::vote_label(self.class_weights)
    }

    /// Thresholds at the `i / (count + 1)` quantiles of the equal-weight
    /// mixture of the per-class Gaussians for `feature`, clipped to the
    /// observed range. Duplicates are removed. Weighting the classes equally
    /// keeps candidates between the classes when one of them is rare.
    pub fn candidate_thresholds(&self, feature: usize, count: usize) -> Vec<f64> {
        let ests: Vec<&GaussianEstimator> =
            self.features[feature].iter().filter(|e| e.weight > 0.0).collect();
        if ests.is_empty() {
            return Vec::new();
        }
        let lo = ests.iter().map(|e| e.min).fold(f64::INFINITY, f64::min);
        let hi = ests.iter().map(|e| e.max).fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Vec::new();
        }
        let n = ests.len() as f64;
        let mixture = |t: f64| ests.iter().map(|e| e.cdf(t)).sum::<f64>() / n;
        let mut out: Vec<f64> = Vec::with_capacity(count);
        for i in 1..=count {
            let p = i as f64 / (count + 1) as f64;
            let t = if mixture(lo) >= p {
                lo
            } else if mixture(hi) <= p {
                hi
            } else {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if mixture(mid) < p {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            };
            if t < hi && out.last().is_none_or(|&last| t > last) {
                out.push(t);
            }
        }
        out
    }

    /// Estimated class weights on each side of `x[feature] <= threshold`.
    pub fn partition(&self, feature: usize, threshold: f64) -> ([f64; 2], [f64; 2]) {
        let mut left = [0.0; 2];
        let mut right = [0.0; 2];
        for c in 0..2 {
            let est = &self.features[feature][c];
            let below = est.weight_at_or_below(threshold).min(self.class_weights[c]);
            // class weight may include a prior that the estimators never saw
            let unseen = self.class_weights[c] - est.weight;
            left[c] = below + unseen.max(0.0) * if est.weight > 0.0 { below / est.weight } else { 0.5 };
            right[c] = self.class_weights[c] - left[c];
        }
        (left, right)
    }

    /// Highest-gain candidate threshold of one feature.
    pub fn best_for_feature(&self, feature: usize, count: usize) -> Option<SplitCandidate> {
        self.candidate_thresholds(feature, count)
            .into_iter()
            .map(|threshold| {
                let (left, right) = self.partition(feature, threshold);
                SplitCandidate {
                    feature,
                    threshold,
                    gain: info_gain(self.class_weights, left, right),
                    left,
                    right,
                }
            })
            .fold(None, |best: Option<SplitCandidate>, c| match best {
                Some(b) if b.gain >= c.gain => Some(b),
                _ => Some(c),
            })
    }

    /// Runs the Hoeffding test over `allowed` features (all when `None`).
    pub fn evaluate(&self, params: &TreeParams, allowed: Option<&[usize]>) -> SplitDecision {
        let n = self.total();
        let epsilon = hoeffding_bound(1.0, params.delta, n.max(1.0)).unwrap_or(f64::INFINITY);
        let features: Vec<usize> = match allowed {
            Some(a) => a.to_vec(),
            None => (0..self.features.len()).collect(),
        };
        let mut per_feature: Vec<SplitCandidate> = features
            .iter()
            .filter_map(|&f| self.best_for_feature(f, params.split_candidates))
            .collect();
        per_feature.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.feature.cmp(&b.feature)));
        let best = per_feature.first().copied();
        let g_best = best.map_or(0.0, |b| b.gain);
        let g_second = per_feature.get(1).map_or(0.0, |c| c.gain.max(0.0));
        let split = g_best > 0.0 && (g_best - g_second > epsilon || epsilon < params.tau);
        SplitDecision {
            best,
            g_best,
            g_second,
            epsilon,
            n,
            split,
        }
    }
}

/// Snapshot of a realized split, kept so the decision can be replayed.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub stats: SplitStats,
    pub allowed: Option<Vec<usize>>,
    pub feature: usize,
    pub threshold: f64,
    pub g_best: f64,
    pub g_second: f64,
    pub epsilon: f64,
    pub n: f64,
    pub depth: usize,
}

impl SplitRecord {
    pub(crate) fn from_decision(
        stats: &SplitStats,
        allowed: Option<&[usize]>,
        decision: &SplitDecision,
        depth: usize,
    ) -> Self {
        let best = decision.best.expect("split without a candidate");
        Self {
            stats: stats.clone(),
            allowed: allowed.map(<[usize]>::to_vec),
            feature: best.feature,
            threshold: best.threshold,
            g_best: decision.g_best,
            g_second: decision.g_second,
            epsilon: decision.epsilon,
            n: decision.n,
            depth,
        }
    }
}
