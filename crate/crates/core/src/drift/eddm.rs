use serde::{Deserialize, Serialize};

use super::{DetectorLevel, DriftDetector, UpdateGuard};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EddmParams {
    /// Warning when `(mean + 2 std) / max` drops below this ratio.
    pub alpha: f64,
    /// Drift when the ratio drops below this; must be below `alpha`.
    pub beta: f64,
    pub min_errors: u64,
}

impl Default for EddmParams {
    fn default() -> Self {
        Self {
            alpha: 0.95,
            beta: 0.90,
            min_errors: 30,
        }
    }
}

/// Early Drift Detection Method: monitors the distance between consecutive
/// errors. Only error updates change its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Eddm {
    params: EddmParams,
    n_errors: u64,
    last_error_index: Option<u64>,
    n_distances: u64,
    d_mean: f64,
    d_m2: f64,
    m2_max: f64,
    level: DetectorLevel,
    guard: UpdateGuard,
}

impl Eddm {
    pub fn new(params: EddmParams) -> Self {
        Self {
            params,
            n_errors: 0,
            last_error_index: None,
            n_distances: 0,
            d_mean: 0.0,
            d_m2: 0.0,
            m2_max: 0.0,
            level: DetectorLevel::InControl,
            guard: UpdateGuard::default(),
        }
    }

    pub fn params(&self) -> EddmParams {
        self.params
    }

    pub fn n_errors(&self) -> u64 {
        self.n_errors
    }

    pub fn mean_distance(&self) -> f64 {
        self.d_mean
    }

    /// Population standard deviation of the inter-error distances.
    pub fn std_distance(&self) -> f64 {
        if self.n_distances == 0 {
            0.0
        } else {
            (self.d_m2 / self.n_distances as f64).max(0.0).sqrt()
        }
    }

    pub fn m2_max(&self) -> f64 {
        self.m2_max
    }
}

impl DriftDetector for Eddm {
    fn update(&mut self, error_bit: u8, stream_index: u64) -> Result<DetectorLevel> {
        self.guard.check(self.level, error_bit, stream_index)?;
        if error_bit == 0 {
            return Ok(self.level);
        }
        self.n_errors += 1;
        if let Some(last) = self.last_error_index {
            let d = (stream_index - last) as f64;
            self.n_distances += 1;
            let delta = d - self.d_mean;
            self.d_mean += delta / self.n_distances as f64;
            self.d_m2 += delta * (d - self.d_mean);
        }
        self.last_error_index = Some(stream_index);

        if self.n_errors < self.params.min_errors {
            self.level = DetectorLevel::InControl;
            return Ok(self.level);
        }
        let m2s = self.d_mean + 2.0 * self.std_distance();
        if m2s > self.m2_max {
            self.m2_max = m2s;
            self.level = DetectorLevel::InControl;
        } else {
            let ratio = m2s / self.m2_max;
            self.level = if ratio < self.params.beta {
                DetectorLevel::Drift
            } else if ratio < self.params.alpha {
                DetectorLevel::Warning
            } else {
                DetectorLevel::InControl
            };
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_errors_never_drift() {
        let mut d = Eddm::new(EddmParams::default());
        for i in 0..5000u64 {
            let level = d.update(u8::from(i % 50 == 49), i).unwrap();
            assert_ne!(level, DetectorLevel::Drift, "at {i}");
        }
        assert_eq!(d.mean_distance(), 50.0);
        assert_eq!(d.std_distance(), 0.0);
    }

    #[test]
    fn all_correct_stream_stays_in_control() {
        let mut d = Eddm::new(EddmParams::default());
        for i in 0..2000 {
            assert_eq!(d.update(0, i).unwrap(), DetectorLevel::InControl);
        }
        assert_eq!(d.n_errors(), 0);
    }

    #[test]
    fn warm_up_emits_only_in_control() {
        let mut d = Eddm::new(EddmParams::default());
        // shrinking gaps would drift immediately after warm-up
        let mut pos = 0u64;
        for k in 0..29u64 {
            pos += 60 - 2 * k;
            assert_eq!(d.update(1, pos).unwrap(), DetectorLevel::InControl);
        }
    }

    #[test]
    fn shrinking_gaps_drift() {
        let mut d = Eddm::new(EddmParams::default());
        let mut i = 0u64;
        let mut level = DetectorLevel::InControl;
        for _ in 0..60 {
            i += 40;
            level = d.update(1, i).unwrap();
        }
        assert_eq!(level, DetectorLevel::InControl);
        for _ in 0..200 {
            i += 1;
            level = d.update(1, i).unwrap();
            if level == DetectorLevel::Drift {
                break;
            }
        }
        assert_eq!(level, DetectorLevel::Drift);
    }

    #[test]
    fn reset_preserves_params() {
        let params = EddmParams {
            alpha: 0.9,
            beta: 0.8,
            min_errors: 12,
        };
        let mut d = Eddm::new(params);
        d.update(1, 3).unwrap();
        d.reset();
        assert_eq!(d.params(), params);
        assert_eq!(d.n_errors(), 0);
    }
}
