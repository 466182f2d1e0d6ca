//! Sliding-window k-nearest-neighbours on z-scored features.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::nb::Welford;
use super::{check_batch, check_dim, Classifier};
use crate::data::LabeledBatch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub window: usize,
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { window: 1000, k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Stored {
    seq: u64,
    features: Vec<f64>,
    label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnWindow {
    params: KnnParams,
    n_features: usize,
    buffer: VecDeque<Stored>,
    next_seq: u64,
    scale: Vec<Welford>,
}

impl KnnWindow {
    pub fn new(n_features: usize, params: KnnParams) -> Self {
        Self {
            params: KnnParams {
                window: params.window.max(1),
                k: params.k.max(1),
            },
            n_features,
            buffer: VecDeque::new(),
            next_seq: 0,
            scale: vec![Welford::default(); n_features],
        }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Stored feature vectors, oldest first.
    pub fn stored(&self) -> impl Iterator<Item = (&[f64], u8)> {
        self.buffer.iter().map(|s| (s.features.as_slice(), s.label))
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        for (acc, &x) in self.scale.iter_mut().zip(features) {
            acc.push(x);
        }
        if self.buffer.len() == self.params.window {
            self.buffer.pop_front();
        }
        self.buffer.push_back(Stored {
            seq: self.next_seq,
            features: features.to_vec(),
            label,
        });
        self.next_seq += 1;
    }

    /// Per-feature divisor; features with no spread contribute nothing.
    fn inv_scale(&self) -> Vec<f64> {
        self.scale
            .iter()
            .map(|w| {
                let sd = w.std_dev();
                if sd > 0.0 {
                    1.0 / sd
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Neighbour votes `[negative, positive]` among the k nearest.
    pub fn votes(&self, features: &[f64]) -> Result<[f64; 2]> {
        if self.buffer.is_empty() {
            return Err(Error::Untrained("knn window is empty"));
        }
        let inv = self.inv_scale();
        let mut dist: Vec<(f64, u64, u8)> = self
            .buffer
            .iter()
            .map(|s| {
                let d = s
                    .features
                    .iter()
                    .zip(features)
                    .zip(&inv)
                    .map(|((a, b), w)| {
                        let z = (a - b) * w;
                        z * z
                    })
                    .sum::<f64>();
                (d, s.seq, s.label)
            })
            .collect();
        let k = self.params.k.min(dist.len());
        let by_distance_then_age =
            |a: &(f64, u64, u8), b: &(f64, u64, u8)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_distance_then_age);
        }
        let mut votes = [0.0; 2];
        for &(_, _, label) in &dist[..k] {
            votes[label as usize] += 1.0;
        }
        Ok(votes)
    }
}

impl Classifier for KnnWindow {
    fn name(&self) -> &'static str {
        "knn"
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
        self.votes(features)
    }

    fn clone_for_run(&self) -> Box<dyn Classifier> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knn(k: usize, window: usize, rows: &[(&[f64], u8)]) -> KnnWindow {
        let d = rows.first().map_or(1, |r| r.0.len());
        let mut m = KnnWindow::new(d, KnnParams { window, k });
        for (x, y) in rows {
            m.learn(x, *y);
        }
        m
    }

    #[test]
    fn ring_buffer_keeps_newest() {
        let m = knn(1, 3, &[(&[1.0], 0), (&[2.0], 0), (&[3.0], 1), (&[4.0], 1), (&[5.0], 0)]);
        let kept: Vec<f64> = m.stored().map(|(x, _)| x[0]).collect();
        assert_eq!(kept, vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn single_instance_decides() {
        let m = knn(5, 10, &[(&[1.0, 2.0], 1)]);
        assert_eq!(m.predict_one(&[-40.0, 7.0]).unwrap(), 1);
    }

    #[test]
    fn exact_match_with_k1() {
        let m = knn(1, 10, &[(&[0.0], 0), (&[1.0], 1), (&[2.0], 0)]);
        assert_eq!(m.predict_one(&[1.0]).unwrap(), 1);
    }

    #[test]
    fn majority_of_three() {
        let m = knn(3, 10, &[(&[0.0], 1), (&[0.1], 1), (&[0.2], 0), (&[5.0], 0), (&[6.0], 0)]);
        assert_eq!(m.predict_one(&[0.1]).unwrap(), 1);
    }

    #[test]
    fn distance_ties_prefer_older_and_vote_ties_go_negative() {
        // equidistant neighbours: the older one (label 1) wins the single slot
        let m = knn(1, 10, &[(&[-1.0], 1), (&[1.0], 0)]);
        assert_eq!(m.predict_one(&[0.0]).unwrap(), 1);
        let m = knn(2, 10, &[(&[-1.0], 1), (&[1.0], 0)]);
        assert_eq!(m.predict_one(&[0.0]).unwrap(), 0);
    }

    #[test]
    fn empty_window_errors() {
        let m = KnnWindow::new(2, KnnParams::default());
        assert!(matches!(m.predict_one(&[0.0, 0.0]), Err(Error::Untrained(_))));
        assert!(matches!(m.predict_one(&[0.0]), Err(Error::Dimension { .. })));
    }
}
