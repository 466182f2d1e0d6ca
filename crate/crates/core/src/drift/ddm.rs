use serde::{Deserialize, Serialize};

use super::{DetectorLevel, DriftDetector, UpdateGuard};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdmParams {
    /// Updates before any level other than `InControl` can be emitted.
    pub min_n: u64,
}

impl Default for DdmParams {
    fn default() -> Self {
        Self { min_n: 30 }
    }
}

/// Drift Detection Method: tracks the running error rate `p` and its
/// binomial deviation `s`, and compares `p + s` with the best `p_min + s_min`
/// seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Ddm {
    params: DdmParams,
    n: u64,
    errors: u64,
    p: f64,
    s: f64,
    p_min: f64,
    s_min: f64,
    level: DetectorLevel,
    guard: UpdateGuard,
}

impl Ddm {
    pub const WARNING_SIGMAS: f64 = 2.0;
    pub const DRIFT_SIGMAS: f64 = 3.0;

    pub fn new(params: DdmParams) -> Self {
        Self {
            params,
            n: 0,
            errors: 0,
            p: 0.0,
            s: 0.0,
            p_min: f64::INFINITY,
            s_min: f64::INFINITY,
            level: DetectorLevel::InControl,
            guard: UpdateGuard::default(),
        }
    }

    pub fn params(&self) -> DdmParams {
        self.params
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn error_rate(&self) -> f64 {
        self.p
    }

    pub fn std_dev(&self) -> f64 {
        self.s
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }
}

impl DriftDetector for Ddm {
    fn update(&mut self, error_bit: u8, stream_index: u64) -> Result<DetectorLevel> {
        self.guard.check(self.level, error_bit, stream_index)?;
        self.n += 1;
        self.errors += u64::from(error_bit);
        let n = self.n as f64;
        self.p = self.errors as f64 / n;
        self.s = (self.p * (1.0 - self.p) / n).sqrt();

        if self.n < self.params.min_n {
            self.level = DetectorLevel::InControl;
            return Ok(self.level);
        }
        if self.p + self.s < self.p_min + self.s_min {
            self.p_min = self.p;
            self.s_min = self.s;
        }
        // strict comparisons: an all-correct stream has s_min = 0 and must stay in control
        let score = self.p + self.s;
        self.level = if score > self.p_min + Self::DRIFT_SIGMAS * self.s_min {
            DetectorLevel::Drift
        } else if score > self.p_min + Self::WARNING_SIGMAS * self.s_min {
            DetectorLevel::Warning
        } else {
            DetectorLevel::InControl
        };
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
    fn zeros_stay_in_control() {
        let mut d = Ddm::new(DdmParams::default());
        for i in 0..1000 {
            assert_eq!(d.update(0, i).unwrap(), DetectorLevel::InControl);
        }
        assert_eq!(d.error_rate(), 0.0);
    }

    #[test]
    fn warm_up_emits_only_in_control() {
        let mut d = Ddm::new(DdmParams { min_n: 50 });
        for i in 0..49 {
            assert_eq!(d.update(u8::from(i > 10), i).unwrap(), DetectorLevel::InControl);
        }
    }

    #[test]
    fn reset_preserves_params() {
        let mut d = Ddm::new(DdmParams { min_n: 77 });
        d.update(1, 0).unwrap();
        d.reset();
        assert_eq!(d.params().min_n, 77);
        assert_eq!(d.n(), 0);
    }
}
