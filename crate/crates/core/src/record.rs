//! Stream elements and scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One element of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Arrival ordinal; strictly increasing along a stream.
    pub seq: u64,
    pub features: Vec<f64>,
    /// `Some(true)` marks a labeled outlier, `Some(false)` a normal point.
    pub label: Option<bool>,
}

impl Record {
    pub fn new(seq: u64, features: Vec<f64>) -> Self {
        Self { seq, features, label: None }
    }

    pub fn labeled(seq: u64, features: Vec<f64>, outlier: bool) -> Self {
        Self { seq, features, label: Some(outlier) }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.features.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got: self.features.len() })
        }
    }
}

/// Anomaly score. Larger always means more anomalous, whatever the detector.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AnomalyScore(pub f64);

impl AnomalyScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<AnomalyScore> for f64 {
    fn from(s: AnomalyScore) -> f64 {
        s.0
    }
}
