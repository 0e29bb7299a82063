//! Online linear one-class SVM trained by subgradient descent.
//!
//! Minimises `|w|^2 / 2 - rho + (1/nu) * mean(max(0, rho - w.x))`. Points with
//! `w.x < rho` fall outside the learned half-space; the score is `rho - w.x`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorRng, OnlineDetector};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::record::AnomalyScore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcsvmConfig {
    pub nu: f64,
    pub lr: f64,
    /// Shuffled passes over each window.
    pub epochs: usize,
}

impl Default for OcsvmConfig {
    fn default() -> Self {
        Self { nu: 0.1, lr: 0.01, epochs: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcsvmState {
    pub w: Vec<f64>,
    pub rho: f64,
    pub nu: f64,
    /// Base rate; step `t` uses `learning_rate / sqrt(t + 1)`.
    pub learning_rate: f64,
    pub steps: u64,
}

impl OcsvmState {
    pub fn new(dim: usize, nu: f64, learning_rate: f64) -> Self {
        Self { w: vec![0.0; dim], rho: 0.0, nu, learning_rate, steps: 0 }
    }

    pub fn sgd_step(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.w.len() {
            return Err(Error::DimensionMismatch { expected: self.w.len(), got: x.len() });
        }
        let lr = self.learning_rate / ((self.steps + 1) as f64).sqrt();
        let violated = dot(&self.w, x) < self.rho;
        let inv_nu = 1.0 / self.nu;
        if violated {
            for (w, &xi) in self.w.iter_mut().zip(x) {
                *w -= lr * (*w - inv_nu * xi);
            }
            self.rho -= lr * (inv_nu - 1.0);
        } else {
            for w in &mut self.w {
                *w -= lr * *w;
            }
            self.rho += lr;
        }
        self.steps += 1;
        Ok(())
    }

    pub fn score(&self, x: &[f64]) -> Result<AnomalyScore> {
        if x.len() != self.w.len() {
            return Err(Error::DimensionMismatch { expected: self.w.len(), got: x.len() });
        }
        Ok(AnomalyScore(self.rho - dot(&self.w, x)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcsvmDetector {
    cfg: OcsvmConfig,
    state: Option<OcsvmState>,
}

impl OcsvmDetector {
    pub fn new(cfg: OcsvmConfig) -> Self {
        Self { cfg, state: None }
    }

    pub fn state(&self) -> Option<&OcsvmState> {
        self.state.as_ref()
    }
}

impl OnlineDetector for OcsvmDetector {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        let dim = window.first().ok_or(Error::EmptyWindow)?.len();
        let mut state = self.state.take().unwrap_or_else(|| OcsvmState::new(dim, self.cfg.nu, self.cfg.lr));
        let mut order: Vec<usize> = (0..window.len()).collect();
        for _ in 0..self.cfg.epochs {
            order.shuffle(rng);
            for &i in &order {
                state.sgd_step(window[i]).expect("window dimension checked by caller");
            }
        }
        self.state = Some(state);
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.state.as_ref().ok_or(Error::Untrained)?.score(x)?.0)
    }

    fn learn_one(&mut self, x: &[f64], _rng: &mut DetectorRng) -> Result<()> {
        self.state.as_mut().ok_or(Error::Untrained)?.sgd_step(x)
    }

    fn buffered(&self) -> usize {
        0
    }
}
