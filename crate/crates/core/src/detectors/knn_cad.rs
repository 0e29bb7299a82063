//! KNN-CAD: conformalized k-NN distance anomaly detection.
//!
//! The reference window is split into a proper training part `T` and a
//! calibration part `C`. A point's non-conformity measure (NCM) is its summed
//! distance to the `k` nearest points of `T`; its conformal p-value is the
//! share of calibration NCMs at least as large. The detector emits `1 - p`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::detectors::{reference_sample, DetectorRng, OnlineDetector};
use crate::error::{Error, Result};
use crate::linalg::k_nearest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CadConfig {
    pub k: usize,
    pub max_reference: usize,
}

impl Default for CadConfig {
    fn default() -> Self {
        Self { k: 5, max_reference: 1024 }
    }
}

/// Sum of Euclidean distances from `query` to its `k` nearest training points.
pub fn cad_ncm<P: AsRef<[f64]>>(training: &[P], query: &[f64], k: usize) -> Result<f64> {
    if training.len() < k || k == 0 {
        return Err(Error::TooFewRecords { detector: "knn-cad", need: k.max(1), got: training.len() });
    }
    Ok(k_nearest(training, query, k, None).iter().map(|&(_, d)| d).sum())
}

/// `(#{a in calibration : a >= ncm} + 1) / (|calibration| + 1)`.
pub fn cad_p_value(calibration: &[f64], ncm: f64) -> f64 {
    let at_least = calibration.iter().filter(|&&a| a >= ncm).count();
    (at_least + 1) as f64 / (calibration.len() + 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CadState {
    training: Vec<Vec<f64>>,
    k: usize,
    /// Calibration NCMs in arrival order (eviction order).
    calibration: VecDeque<f64>,
    /// Same multiset, ascending, for O(log n) p-values.
    sorted: Vec<f64>,
    calibration_capacity: usize,
}

impl CadState {
    pub fn new<P: AsRef<[f64]>>(training: &[P], calibration: &[P], k: usize) -> Result<Self> {
        if calibration.is_empty() {
            return Err(Error::TooFewRecords { detector: "knn-cad", need: 2, got: training.len() });
        }
        let training: Vec<Vec<f64>> = training.iter().map(|p| p.as_ref().to_vec()).collect();
        let calibration =
            calibration.iter().map(|c| cad_ncm(&training, c.as_ref(), k)).collect::<Result<VecDeque<f64>>>()?;
        let mut sorted: Vec<f64> = calibration.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let calibration_capacity = calibration.len();
        Ok(Self { training, k, calibration, sorted, calibration_capacity })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn calibration_scores(&self) -> &[f64] {
        &self.sorted
    }

    pub fn ncm(&self, x: &[f64]) -> f64 {
        k_nearest(&self.training, x, self.k, None).iter().map(|&(_, d)| d).sum()
    }

    pub fn p_value(&self, x: &[f64]) -> f64 {
        let ncm = self.ncm(x);
        let below = self.sorted.partition_point(|&a| a < ncm);
        (self.sorted.len() - below + 1) as f64 / (self.sorted.len() + 1) as f64
    }

    /// Adds `x`'s NCM to the calibration set, evicting the oldest one past capacity.
    pub fn calibrate_one(&mut self, x: &[f64]) {
        let ncm = self.ncm(x);
        self.calibration.push_back(ncm);
        let at = self.sorted.partition_point(|&a| a < ncm);
        self.sorted.insert(at, ncm);
        while self.calibration.len() > self.calibration_capacity {
            let old = self.calibration.pop_front().expect("non-empty");
            let at = self.sorted.partition_point(|&a| a < old);
            self.sorted.remove(at);
        }
    }

    fn buffered(&self) -> usize {
        self.training.len() + self.calibration.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnCad {
    cfg: CadConfig,
    state: Option<CadState>,
}

impl KnnCad {
    pub fn new(cfg: CadConfig) -> Self {
        Self { cfg, state: None }
    }

    pub fn state(&self) -> Option<&CadState> {
        self.state.as_ref()
    }

    pub fn p_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.state.as_ref().ok_or(Error::Untrained)?.p_value(x))
    }
}

impl OnlineDetector for KnnCad {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        let sample = reference_sample(window, self.cfg.max_reference, rng);
        if sample.len() < 2 {
            return Err(Error::TooFewRecords { detector: "knn-cad", need: 2, got: sample.len() });
        }
        // 2:1 training/calibration split, training first.
        let n_train = ((2 * sample.len()).div_ceil(3)).min(sample.len() - 1);
        let (training, calibration) = sample.split_at(n_train);
        let k = self.cfg.k.min(training.len());
        self.state = Some(CadState::new(training, calibration, k)?);
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 - self.p_value(x)?)
    }

    fn learn_one(&mut self, x: &[f64], _rng: &mut DetectorRng) -> Result<()> {
        self.state.as_mut().ok_or(Error::Untrained)?.calibrate_one(x);
        Ok(())
    }

    fn buffered(&self) -> usize {
        self.state.as_ref().map_or(0, CadState::buffered)
    }
}
