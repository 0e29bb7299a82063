//! Exact-STORM: distance-based outliers over a count-based sliding window.
//!
//! The stream manager inserts each arriving point into the indexed stream
//! buffer (ISB). Every node keeps the number of *succeeding* neighbours within
//! radius `R` and the arrival ordinals of up to `k` most recent *preceding*
//! neighbours. Preceding neighbours expire with the window, succeeding ones
//! never outlive the node, so `count_after + live(prev_neighbors)` is the exact
//! neighbour count (capped at `k` on the preceding side). The query manager
//! turns that into a binary decision (`count < k`) or, for AUC purposes, the
//! continuous score `max(0, 1 - c/k)`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::detectors::{reference_sample, DetectorRng, OnlineDetector};
use crate::error::{Error, Result};
use crate::linalg::{dist, sq_dist};
use crate::record::AnomalyScore;

/// User-facing configuration (`storm.*` keys).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StormConfig {
    /// Neighbourhood radius; `None` calibrates it from the first window.
    pub radius: Option<f64>,
    pub k: usize,
    /// ISB window length; `None` uses the size of the fitted reference.
    pub window: Option<usize>,
    pub max_reference: usize,
}

impl Default for StormConfig {
    fn default() -> Self {
        Self { radius: None, k: 5, window: None, max_reference: 1024 }
    }
}

/// Resolved parameters the ISB operates with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsbParams {
    pub radius: f64,
    pub k: usize,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsbNode {
    pub point: Vec<f64>,
    pub arrival: u64,
    /// Succeeding neighbours within the radius.
    pub count_after: usize,
    /// Arrival ordinals of up to `k` preceding neighbours, most recent first.
    pub prev_neighbors: Vec<u64>,
}

/// Indexed stream buffer: one node per live stream object, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Isb {
    nodes: VecDeque<IsbNode>,
    next_arrival: u64,
}

impl Isb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &IsbNode> {
        self.nodes.iter()
    }

    /// Arrival ordinal of the oldest live node.
    pub fn oldest_arrival(&self) -> Option<u64> {
        self.nodes.front().map(|n| n.arrival)
    }

    /// Stream-manager step: evict expired nodes, update neighbour counts and
    /// append the new node. Returns the new node's arrival ordinal.
    pub fn insert(&mut self, point: &[f64], params: &IsbParams) -> u64 {
        let arrival = self.next_arrival;
        self.next_arrival += 1;
        let window = params.window.max(1) as u64;
        while let Some(front) = self.nodes.front() {
            if front.arrival + window <= arrival {
                self.nodes.pop_front();
            } else {
                break;
            }
        }

        let r2 = params.radius * params.radius;
        let mut prev = Vec::with_capacity(params.k);
        // Newest first so `prev` ends up most-recent-first.
        for node in self.nodes.iter_mut().rev() {
            if sq_dist(&node.point, point) <= r2 {
                node.count_after += 1;
                if prev.len() < params.k {
                    prev.push(node.arrival);
                }
            }
        }
        self.nodes.push_back(IsbNode { point: point.to_vec(), arrival, count_after: 0, prev_neighbors: prev });
        arrival
    }

    /// Neighbour count of the node at `idx` (0 = oldest live node).
    pub fn live_count(&self, idx: usize) -> usize {
        let node = &self.nodes[idx];
        let oldest = self.oldest_arrival().unwrap_or(0);
        node.count_after + node.prev_neighbors.iter().filter(|&&a| a >= oldest).count()
    }

    /// Binary Exact-STORM decision for a live node.
    pub fn is_outlier(&self, idx: usize, params: &IsbParams) -> bool {
        self.live_count(idx) < params.k
    }

    /// Query-manager step for a point that is not (yet) in the buffer.
    pub fn score(&self, point: &[f64], params: &IsbParams) -> Result<AnomalyScore> {
        if self.nodes.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let r2 = params.radius * params.radius;
        let c = self.nodes.iter().filter(|n| sq_dist(&n.point, point) <= r2).take(params.k).count();
        Ok(AnomalyScore(storm_score_from_count(c, params.k)))
    }
}

/// `max(0, 1 - c/k)`.
pub fn storm_score_from_count(c: usize, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    (1.0 - c as f64 / k as f64).max(0.0)
}

/// 5th-percentile pairwise distance over (at most) the first 512 points,
/// falling back to the smallest positive distance for duplicate-heavy data.
pub fn calibrate_radius(points: &[&[f64]]) -> f64 {
    let pts = &points[..points.len().min(512)];
    let mut d = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d.push(dist(pts[i], pts[j]));
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let idx = ((d.len() - 1) as f64 * 0.05).round() as usize;
    let (_, q, _) = d.select_nth_unstable_by(idx, f64::total_cmp);
    let q = *q;
    if q > 0.0 {
        return q;
    }
    d.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactStorm {
    cfg: StormConfig,
    params: Option<IsbParams>,
    isb: Isb,
}

impl ExactStorm {
    pub fn new(cfg: StormConfig) -> Self {
        Self { cfg, params: None, isb: Isb::new() }
    }

    pub fn params(&self) -> Option<&IsbParams> {
        self.params.as_ref()
    }

    pub fn isb(&self) -> &Isb {
        &self.isb
    }
}

impl OnlineDetector for ExactStorm {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        let reference = reference_sample(window, self.cfg.max_reference, rng);
        let isb_window = self.cfg.window.unwrap_or(reference.len()).max(1);
        let radius = match (self.params, self.cfg.radius) {
            (Some(p), _) => p.radius,
            (None, Some(r)) => r,
            (None, None) => {
                let r = calibrate_radius(&reference);
                log::info!("exact-storm: auto-calibrated radius {r:.6} from {} points", reference.len());
                r
            }
        };
        let params = IsbParams { radius, k: self.cfg.k.min(isb_window).max(1), window: isb_window };
        let mut isb = Isb::new();
        for p in &reference {
            isb.insert(p, &params);
        }
        self.params = Some(params);
        self.isb = isb;
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        let params = self.params.as_ref().ok_or(Error::Untrained)?;
        Ok(self.isb.score(x, params)?.0)
    }

    fn learn_one(&mut self, x: &[f64], _rng: &mut DetectorRng) -> Result<()> {
        let params = self.params.ok_or(Error::Untrained)?;
        self.isb.insert(x, &params);
        Ok(())
    }

    fn buffered(&self) -> usize {
        self.isb.len()
    }
}
