//! Local outlier factor against a window-local reference set.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::detectors::{reference_sample, DetectorRng, OnlineDetector};
use crate::error::{Error, Result};
use crate::linalg::k_nearest;
use crate::record::{AnomalyScore, Record};

/// Local reachability density assigned when every neighbour is coincident.
pub const LRD_CLAMP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofConfig {
    pub k: usize,
    pub max_reference: usize,
}

impl Default for LofConfig {
    fn default() -> Self {
        Self { k: 10, max_reference: 1024 }
    }
}

/// `max{k-distance(B), d(A, B)}`.
pub fn reachability_distance(k_distance_b: f64, d_ab: f64) -> Result<f64> {
    for v in [k_distance_b, d_ab] {
        if v < 0.0 {
            return Err(Error::NegativeDistance(v));
        }
    }
    Ok(k_distance_b.max(d_ab))
}

fn lrd_from_mean(mean_reach: f64) -> f64 {
    if mean_reach > 0.0 {
        1.0 / mean_reach
    } else {
        LRD_CLAMP
    }
}

/// Reference set with k-distances and local reachability densities
/// precomputed, so a query costs one k-NN scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofReference {
    points: Vec<Vec<f64>>,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofReference {
    pub fn new(points: Vec<Vec<f64>>, k: usize) -> Result<Self> {
        if k == 0 || points.len() <= k {
            return Err(Error::TooFewRecords { detector: "lof", need: k + 1, got: points.len() });
        }
        let neighbors: Vec<Vec<(usize, f64)>> =
            (0..points.len()).map(|i| k_nearest(&points, &points[i], k, Some(i))).collect();
        let k_distance: Vec<f64> = neighbors.iter().map(|nn| nn[k - 1].1).collect();
        let lrd = neighbors
            .iter()
            .map(|nn| {
                let sum: f64 = nn.iter().map(|&(o, d)| k_distance[o].max(d)).sum();
                lrd_from_mean(sum / k as f64)
            })
            .collect();
        Ok(Self { points, k, k_distance, lrd })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// LOF of a query that is not itself a member of the reference set.
    pub fn score(&self, query: &[f64]) -> f64 {
        let nn = k_nearest(&self.points, query, self.k, None);
        let reach: f64 = nn.iter().map(|&(o, d)| self.k_distance[o].max(d)).sum();
        let lrd_q = lrd_from_mean(reach / self.k as f64);
        let lrd_sum: f64 = nn.iter().map(|&(o, _)| self.lrd[o]).sum();
        lrd_sum / self.k as f64 / lrd_q
    }
}

pub fn lof_score(reference: &[Record], query: &Record, cfg: &LofConfig) -> Result<AnomalyScore> {
    let dim = query.dim();
    for r in reference {
        r.check_dim(dim)?;
    }
    let points = reference.iter().map(|r| r.features.clone()).collect();
    Ok(AnomalyScore(LofReference::new(points, cfg.k)?.score(&query.features)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofDetector {
    cfg: LofConfig,
    reference: Option<LofReference>,
    /// Reference size fixed by the last window fit; `learn_one` slides within it.
    capacity: usize,
}

impl LofDetector {
    pub fn new(cfg: LofConfig) -> Self {
        Self { cfg, reference: None, capacity: 0 }
    }

    pub fn reference(&self) -> Option<&LofReference> {
        self.reference.as_ref()
    }
}

impl OnlineDetector for LofDetector {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        let sample = reference_sample(window, self.cfg.max_reference, rng);
        if sample.len() < 2 {
            return Err(Error::TooFewRecords { detector: "lof", need: 2, got: sample.len() });
        }
        let k = self.cfg.k.min(sample.len() - 1);
        let points = sample.iter().map(|p| p.to_vec()).collect();
        self.capacity = sample.len();
        self.reference = Some(LofReference::new(points, k)?);
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.reference.as_ref().ok_or(Error::Untrained)?.score(x))
    }

    fn learn_one(&mut self, x: &[f64], _rng: &mut DetectorRng) -> Result<()> {
        let reference = self.reference.take().ok_or(Error::Untrained)?;
        let k = reference.k;
        let mut points: VecDeque<Vec<f64>> = reference.points.into();
        points.push_back(x.to_vec());
        while points.len() > self.capacity {
            points.pop_front();
        }
        self.reference = Some(LofReference::new(points.into(), k)?);
        Ok(())
    }

    fn buffered(&self) -> usize {
        self.reference.as_ref().map_or(0, LofReference::len)
    }
}
