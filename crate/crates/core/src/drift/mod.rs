//! Concept-drift detectors over binary error streams.
//!
//! All three detectors consume the per-instance misclassification indicator
//! (1 = error) tagged with its stream position and report a three-level
//! signal. `Drift` is sticky: once emitted, further updates are rejected until
//! the caller invokes [`DriftDetector::reset`].

mod adwin;
mod ddm;
mod eddm;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use adwin::{adwin_cut_threshold, Adwin, AdwinParams};
pub use ddm::{Ddm, DdmParams};
pub use eddm::{Eddm, EddmParams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorLevel {
    InControl,
    Warning,
    Drift,
}

impl fmt::Display for DetectorLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorLevel::InControl => "in_control",
            DetectorLevel::Warning => "warning",
            DetectorLevel::Drift => "drift",
        })
    }
}

pub trait DriftDetector {
    /// Feeds one error indicator observed at `stream_index`.
    ///
    /// Stream indices must be strictly increasing between resets.
    fn update(&mut self, error_bit: u8, stream_index: u64) -> Result<DetectorLevel>;

    /// Clears all statistics, keeping the configured parameters.
    fn reset(&mut self);

    fn level(&self) -> DetectorLevel;
}

/// Validation shared by every detector's `update`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct UpdateGuard {
    last_index: Option<u64>,
}

impl UpdateGuard {
    pub(crate) fn check(&mut self, level: DetectorLevel, error_bit: u8, stream_index: u64) -> Result<()> {
        if level == DetectorLevel::Drift {
            return Err(Error::DetectorMisuse(
                "update after Drift without reset".into(),
            ));
        }
        if error_bit > 1 {
            return Err(Error::DetectorMisuse(format!(
                "error bit must be 0 or 1, got {error_bit}"
            )));
        }
        if let Some(last) = self.last_index {
            if stream_index <= last {
                return Err(Error::DetectorMisuse(format!(
                    "stream index {stream_index} does not follow {last}"
                )));
            }
        }
        self.last_index = Some(stream_index);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorKind {
    Ddm,
    Eddm,
    Adwin,
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Ddm => "ddm",
            DetectorKind::Eddm => "eddm",
            DetectorKind::Adwin => "adwin",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub ddm: DdmParams,
    pub eddm: EddmParams,
    pub adwin: AdwinParams,
}

/// Any of the three detectors behind one value type.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Ddm(Ddm),
    Eddm(Eddm),
    Adwin(Adwin),
}

impl Detector {
    pub fn new(kind: DetectorKind, params: &DetectorParams) -> Self {
        match kind {
            DetectorKind::Ddm => Detector::Ddm(Ddm::new(params.ddm)),
            DetectorKind::Eddm => Detector::Eddm(Eddm::new(params.eddm)),
            DetectorKind::Adwin => Detector::Adwin(Adwin::new(params.adwin)),
        }
    }

    pub fn kind(&self) -> DetectorKind {
        match self {
            Detector::Ddm(_) => DetectorKind::Ddm,
            Detector::Eddm(_) => DetectorKind::Eddm,
            Detector::Adwin(_) => DetectorKind::Adwin,
        }
    }
}

impl DriftDetector for Detector {
    fn update(&mut self, error_bit: u8, stream_index: u64) -> Result<DetectorLevel> {
        match self {
            Detector::Ddm(d) => d.update(error_bit, stream_index),
            Detector::Eddm(d) => d.update(error_bit, stream_index),
            Detector::Adwin(d) => d.update(error_bit, stream_index),
        }
    }

    fn reset(&mut self) {
        match self {
            Detector::Ddm(d) => d.reset(),
            Detector::Eddm(d) => d.reset(),
            Detector::Adwin(d) => d.reset(),
        }
    }

    fn level(&self) -> DetectorLevel {
        match self {
            Detector::Ddm(d) => d.level(),
            Detector::Eddm(d) => d.level(),
            Detector::Adwin(d) => d.level(),
        }
    }
}
