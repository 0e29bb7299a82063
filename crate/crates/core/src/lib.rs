//! Streaming outlier detection with sliding-window incremental training.
//!
//! Seven online detectors share one contract ([`DetectorState`]): fit a window
//! to move from model `m_i` to `m_{i+1}`, score records read-only, optionally
//! learn single records. [`windows`] drives the window-by-window trainer,
//! [`ingest`] loads and prepares labeled tabular streams, and [`eval`] compares
//! offline-trained against incrementally-trained models by AUC.

pub mod detectors;
pub mod error;
pub mod eval;
pub mod ingest;
mod linalg;
pub mod record;
pub mod state;
pub mod windows;

pub use detectors::{DetectorConfig, DetectorKind, OnlineDetector};
pub use error::{Error, Result};
pub use record::{AnomalyScore, Record};
pub use state::DetectorState;
