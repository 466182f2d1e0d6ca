//! Streaming binary classification with drift-gated incremental retraining.
//!
//! A model is first trained batch by batch on a training split (Stage I),
//! then scored on a stream of batches where a drift detector decides which
//! batches it is retrained on (Stage II). Per-batch sensitivity, specificity
//! and their balanced mean are reported.

pub mod config;
pub mod data;
pub mod drift;
pub mod error;
pub mod learners;
pub mod models;
pub mod pipeline;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
