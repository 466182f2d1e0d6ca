//! Independent reference implementations used as test oracles.
//!
//! These favor directness over speed: every statistic is recomputed from
//! the raw stored values at each step.

#![allow(dead_code)]

use rand::Rng;
use streamfd::drift::DetectorLevel;
use streamfd::learners::split::{SplitRecord, TreeParams};
use streamfd::rng::rng_from_seed;

/// Exact ADWIN: keeps every bit and tests every cut point after each
/// insertion, newest side first, dropping the older side on the first
/// firing cut until none fires. Returns the 1-based positions where a cut
/// fired (resetting nothing, matching a detector that is reset right after).
pub struct ExactAdwin {
    pub delta: f64,
    pub window: Vec<f64>,
}

impl ExactAdwin {
    pub fn new(delta: f64) -> Self {
        Self { delta, window: Vec::new() }
    }

    /// Inserts `x`; returns true if part of the window was dropped.
    pub fn insert(&mut self, x: f64) -> bool {
        self.window.push(x);
        let mut dropped = false;
        'outer: loop {
            let w = self.window.len();
            if w < 2 {
                break;
            }
            let total: f64 = self.window.iter().sum();
            let mean = total / w as f64;
            let var = self.window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w as f64;
            let ln = (2.0 * w as f64 / self.delta).ln();
            let mut newer_sum = 0.0;
            for n1 in 1..w {
                newer_sum += self.window[w - n1];
                let n0 = (w - n1) as f64;
                let n1f = n1 as f64;
                let m = 1.0 / (1.0 / n0 + 1.0 / n1f);
                let eps = (2.0 / m * var * ln).sqrt() + 2.0 / (3.0 * m) * ln;
                let mean1 = newer_sum / n1f;
                let mean0 = (total - newer_sum) / n0;
                if (mean0 - mean1).abs() >= eps {
                    self.window.drain(..w - n1);
                    dropped = true;
                    continue 'outer;
                }
            }
            break;
        }
        dropped
    }
}

/// First 1-based step at which the exact oracle fires, if any.
pub fn exact_adwin_first_detection(bits: &[u8], delta: f64) -> Option<usize> {
    let mut a = ExactAdwin::new(delta);
    bits.iter().position(|&b| a.insert(f64::from(b))).map(|i| i + 1)
}

/// DDM levels step by step, from cumulative counts.
pub fn ddm_levels(bits: &[u8], min_n: u64) -> Vec<DetectorLevel> {
    let mut errors = 0u64;
    let mut best: Option<(f64, f64)> = None;
    let mut out = Vec::with_capacity(bits.len());
    for (i, &b) in bits.iter().enumerate() {
        let n = (i + 1) as u64;
        errors += u64::from(b);
        let p = errors as f64 / n as f64;
        let s = (p * (1.0 - p) / n as f64).sqrt();
        if n < min_n {
            out.push(DetectorLevel::InControl);
            continue;
        }
        let (p_min, s_min) = match best {
            Some((pm, sm)) if pm + sm <= p + s => (pm, sm),
            _ => (p, s),
        };
        best = Some((p_min, s_min));
        out.push(if p + s > p_min + 3.0 * s_min {
            DetectorLevel::Drift
        } else if p + s > p_min + 2.0 * s_min {
            DetectorLevel::Warning
        } else {
            DetectorLevel::InControl
        });
    }
    out
}

/// EDDM levels step by step, recomputing mean and population standard
/// deviation of all inter-error distances at every error.
pub fn eddm_levels(bits: &[u8], alpha: f64, beta: f64, min_errors: u64) -> Vec<DetectorLevel> {
    let mut last: Option<usize> = None;
    let mut distances: Vec<f64> = Vec::new();
    let mut n_errors = 0u64;
    let mut m2_max = 0.0f64;
    let mut level = DetectorLevel::InControl;
    let mut out = Vec::with_capacity(bits.len());
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            n_errors += 1;
            if let Some(l) = last {
                distances.push((i - l) as f64);
            }
            last = Some(i);
            level = if n_errors < min_errors {
                DetectorLevel::InControl
            } else {
                let k = distances.len() as f64;
                let mean = distances.iter().sum::<f64>() / k;
                let std = (distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / k).sqrt();
                let m2s = mean + 2.0 * std;
                if m2s > m2_max {
                    m2_max = m2s;
                    DetectorLevel::InControl
                } else if m2s / m2_max < beta {
                    DetectorLevel::Drift
                } else if m2s / m2_max < alpha {
                    DetectorLevel::Warning
                } else {
                    DetectorLevel::InControl
                }
            };
        }
        out.push(level);
    }
    out
}

/// First 1-based step whose level is Drift.
pub fn first_drift(levels: &[DetectorLevel]) -> Option<usize> {
    levels.iter().position(|&l| l == DetectorLevel::Drift).map(|i| i + 1)
}

/// Brute-force k-nearest-neighbour vote with explicit z-scoring over the
/// stored points; distance ties go to the earlier point, vote ties to 0.
pub fn knn_vote(stored: &[(Vec<f64>, u8)], scale: &[(f64, f64)], query: &[f64], k: usize) -> u8 {
    let z = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(scale)
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    };
    let q = z(query);
    let mut d: Vec<(f64, usize)> = stored
        .iter()
        .enumerate()
        .map(|(i, (x, _))| {
            let zx = z(x);
            (zx.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ones = d.iter().take(k).filter(|(_, i)| stored[*i].1 == 1).count();
    let taken = k.min(d.len());
    u8::from(ones * 2 > taken)
}

/// Deterministic Bernoulli bit stream from a seed.
pub fn bernoulli_bits(seed: u64, len: usize, rate_at: impl Fn(usize) -> f64) -> Vec<u8> {
    let mut rng = rng_from_seed(seed);
    (0..len).map(|i| u8::from(rng.random::<f64>() < rate_at(i))).collect()
}

/// Step stream with random length, change point and rates; the change may
/// be tiny or absent.
pub fn random_step_stream(seed: u64) -> Vec<u8> {
    let mut rng = rng_from_seed(seed);
    let len = rng.random_range(200..=2048usize);
    let change = rng.random_range(0..len);
    let p0: f64 = rng.random_range(0.0..0.6);
    let p1: f64 = if rng.random_bool(0.3) { p0 } else { rng.random_range(0.0..1.0) };
    bernoulli_bits(seed ^ 0xa5a5, len, |i| if i < change { p0 } else { p1 })
}

/// Either a stationary stream (even seeds) or a step whose rate rises by at
/// least 0.5 after a pre-change segment of at least a quarter of the stream.
pub fn clear_step_stream(seed: u64) -> Vec<u8> {
    let mut rng = rng_from_seed(seed);
    let len = rng.random_range(512..=2048usize);
    let p0: f64 = rng.random_range(0.05..0.3);
    if seed % 2 == 0 {
        return bernoulli_bits(seed ^ 0x5a5a, len, |_| p0);
    }
    let change = rng.random_range(len / 4..len / 2);
    let p1 = p0 + rng.random_range(0.5..0.6);
    bernoulli_bits(seed ^ 0x5a5a, len, |i| if i < change { p0 } else { p1 })
}

fn log2_entropy(w: [f64; 2]) -> f64 {
    let t = w[0] + w[1];
    if t <= 0.0 {
        return 0.0;
    }
    -w.iter().filter(|&&v| v > 0.0).map(|&v| v / t * (v / t).log2()).sum::<f64>()
}

/// Replays a recorded split from its frozen statistics: recomputes every
/// candidate's information gain and an independent Hoeffding bound, then
/// checks the recorded choice and the split criterion.
pub fn check_split(rec: &SplitRecord, params: &TreeParams) -> Result<(), String> {
    let s = &rec.stats;
    let total = s.class_weights[0] + s.class_weights[1];
    let parent = log2_entropy(s.class_weights);
    let features: Vec<usize> = rec.allowed.clone().unwrap_or_else(|| (0..s.features.len()).collect());
    let mut best: Vec<(f64, usize)> = features
        .iter()
        .filter_map(|&f| {
            s.candidate_thresholds(f, params.split_candidates)
                .into_iter()
                .map(|t| {
                    let (l, r) = s.partition(f, t);
                    let (nl, nr) = (l[0] + l[1], r[0] + r[1]);
                    parent - (nl * log2_entropy(l) + nr * log2_entropy(r)) / total
                })
                .reduce(f64::max)
                .map(|g| (g, f))
        })
        .collect();
    best.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let Some(&(g1, f1)) = best.first() else {
        return Err("no candidate at a recorded split".into());
    };
    let g2 = best.get(1).map_or(0.0, |p| p.0.max(0.0));
    let eps = ((1.0 / params.delta).ln() / (2.0 * total)).sqrt();
    if (eps - rec.epsilon).abs() > 1e-12 {
        return Err(format!("bound {} vs independent {eps}", rec.epsilon));
    }
    if (g1 - rec.g_best).abs() > 1e-9 || f1 != rec.feature {
        return Err(format!("best ({g1}, x{f1}) vs recorded ({}, x{})", rec.g_best, rec.feature));
    }
    if !(g1 > 0.0 && (g1 - g2 > eps || eps < params.tau)) {
        return Err(format!("gap {} with bound {eps}", g1 - g2));
    }
    Ok(())
}
