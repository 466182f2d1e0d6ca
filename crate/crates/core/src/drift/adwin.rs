use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{DetectorLevel, DriftDetector, UpdateGuard};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdwinParams {
    /// Confidence parameter of the cut test.
    pub delta: f64,
    /// Buckets kept per exponential-histogram level before merging.
    pub max_buckets: usize,
}

impl Default for AdwinParams {
    fn default() -> Self {
        Self {
            delta: 0.002,
            max_buckets: 5,
        }
    }
}

/// Compressed run of consecutive window items.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bucket {
    count: u64,
    sum: f64,
    /// Sum of squared deviations from the bucket mean.
    m2: f64,
}

impl Bucket {
    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn merge(a: Bucket, b: Bucket) -> Bucket {
        let count = a.count + b.count;
        let d = a.mean() - b.mean();
        Bucket {
            count,
            sum: a.sum + b.sum,
            m2: a.m2 + b.m2 + d * d * (a.count as f64 * b.count as f64) / count as f64,
        }
    }
}

/// Cut threshold for splitting a window of `total` items with population
/// variance `variance` into an older part of `n0` and a newer part of `n1`
/// items. `m = 1 / (1/n0 + 1/n1)` and the confidence is corrected to
/// `delta / total` for the number of cut points.
pub fn adwin_cut_threshold(n0: f64, n1: f64, total: f64, variance: f64, delta: f64) -> f64 {
    let m = 1.0 / (1.0 / n0 + 1.0 / n1);
    let log_term = (2.0 * total / delta).ln();
    (2.0 / m * variance * log_term).sqrt() + 2.0 / (3.0 * m) * log_term
}

/// Adaptive windowing over an exponential histogram.
///
/// Level `i` holds buckets of `2^i` items, newest first. After each
/// insertion every bucket boundary is tested newest-to-oldest; at the first
/// boundary whose sub-window means differ by at least the cut threshold the
/// older side is dropped, and the scan repeats until no boundary fires.
#[derive(Debug, Clone, PartialEq)]
pub struct Adwin {
    params: AdwinParams,
    levels: Vec<VecDeque<Bucket>>,
    width: u64,
    sum: f64,
    m2: f64,
    level: DetectorLevel,
    guard: UpdateGuard,
}

impl Adwin {
    pub fn new(params: AdwinParams) -> Self {
        Self {
            params,
            levels: Vec::new(),
            width: 0,
            sum: 0.0,
            m2: 0.0,
            level: DetectorLevel::InControl,
            guard: UpdateGuard::default(),
        }
    }

    pub fn params(&self) -> AdwinParams {
        self.params
    }

    /// Number of items currently in the window.
    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn mean(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.sum / self.width as f64
        }
    }

    /// Population variance of the window.
    pub fn variance(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            (self.m2 / self.width as f64).max(0.0)
        }
    }

    pub fn bucket_count(&self) -> usize {
        self.levels.iter().map(VecDeque::len).sum()
    }

    /// Bucket sizes per level, for inspecting the histogram invariants.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(VecDeque::len).collect()
    }

    /// Inserts a value in `[0, 1]` and runs the cut test. Returns `true` when
    /// part of the window was dropped. Unlike [`DriftDetector::update`] this
    /// does not latch a sticky drift, which suits detectors embedded in
    /// learners.
    pub fn insert(&mut self, value: f64) -> bool {
        if self.width > 0 {
            let mean = self.mean();
            let w = self.width as f64;
            self.m2 += w / (w + 1.0) * (value - mean) * (value - mean);
        }
        self.width += 1;
        self.sum += value;
        if self.levels.is_empty() {
            self.levels.push(VecDeque::new());
        }
        self.levels[0].push_front(Bucket {
            count: 1,
            sum: value,
            m2: 0.0,
        });
        self.compress();
        self.shrink()
    }

    /// Inserts `value` and reports only changes where the retained (newer)
    /// part of the window has a higher mean than the window had before, i.e.
    /// an increase in error rate.
    pub fn insert_detect_increase(&mut self, value: f64) -> bool {
        let before = if self.width == 0 {
            value
        } else {
            (self.sum + value) / (self.width + 1) as f64
        };
        self.insert(value) && self.mean() > before
    }

    fn compress(&mut self) {
        let max = self.params.max_buckets.max(1);
        let mut i = 0;
        while i < self.levels.len() {
            if self.levels[i].len() <= max {
                break;
            }
            let older = self.levels[i].pop_back().expect("level over capacity");
            let newer = self.levels[i].pop_back().expect("level over capacity");
            if i + 1 == self.levels.len() {
                self.levels.push(VecDeque::new());
            }
            self.levels[i + 1].push_front(Bucket::merge(newer, older));
            i += 1;
        }
    }

    fn shrink(&mut self) -> bool {
        let mut dropped = false;
        while let Some((keep_levels, keep_in_last, kept)) = self.find_cut() {
            self.levels.truncate(keep_levels);
            if let Some(last) = self.levels.last_mut() {
                last.truncate(keep_in_last);
            }
            while self.levels.last().is_some_and(VecDeque::is_empty) {
                self.levels.pop();
            }
            self.width = kept.count;
            self.sum = kept.sum;
            self.m2 = kept.m2;
            dropped = true;
        }
        dropped
    }

    /// Scans boundaries newest-to-oldest. On the first firing cut returns
    /// how much of the histogram to keep and the statistics of the kept part.
    fn find_cut(&self) -> Option<(usize, usize, Bucket)> {
        if self.width < 2 {
            return None;
        }
        let total = self.width as f64;
        let variance = self.variance();
        let mut newer: Option<Bucket> = None;
        for (li, level) in self.levels.iter().enumerate() {
            for (bi, bucket) in level.iter().enumerate() {
                let acc = match newer {
                    None => *bucket,
                    Some(acc) => Bucket::merge(acc, *bucket),
                };
                newer = Some(acc);
                if acc.count >= self.width {
                    return None;
                }
                let n1 = acc.count as f64;
                let n0 = total - n1;
                let mean1 = acc.sum / n1;
                let mean0 = (self.sum - acc.sum) / n0;
                let eps = adwin_cut_threshold(n0, n1, total, variance, self.params.delta);
                if (mean0 - mean1).abs() >= eps {
                    return Some((li + 1, bi + 1, acc));
                }
            }
        }
        None
    }
}

impl DriftDetector for Adwin {
    fn update(&mut self, error_bit: u8, stream_index: u64) -> Result<DetectorLevel> {
        self.guard.check(self.level, error_bit, stream_index)?;
        if self.insert(f64::from(error_bit)) {
            self.level = DetectorLevel::Drift;
        }
        Ok(self.level)
    }

    fn reset(&mut self) {
        *self = Self::new(self.params);
    }

    fn level(&self) -> DetectorLevel {
        self.level
    }
}
