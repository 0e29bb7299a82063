//! Isolation forest with adaptive-sliding-window (ASD) retraining.
//!
//! Trees isolate points by recursive random axis-parallel splits on random
//! subsamples. A point's score is `2^(-E[h(x)] / c(psi))` where `h` is the
//! path length and `c` the expected path length of an unsuccessful BST
//! search. Under ASD a new window only replaces the forest when the share of
//! its points the current forest flags as anomalous (score > 0.5) exceeds
//! `threshold_u`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorRng, OnlineDetector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IforestConfig {
    pub trees: usize,
    pub psi: usize,
    pub threshold_u: f64,
}

impl Default for IforestConfig {
    fn default() -> Self {
        Self { trees: 100, psi: 256, threshold_u: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal { feature: usize, threshold: f64, left: u32, right: u32 },
    Leaf { size: usize, depth: usize },
}

/// Arena-allocated isolation tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    nodes: Vec<Node>,
}

/// `c(m)`: average path length of an unsuccessful search in a BST of `m` keys.
pub fn average_path_length(m: usize) -> f64 {
    match m {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let harmonic: f64 = (1..m).map(|i| 1.0 / i as f64).sum();
            2.0 * harmonic - 2.0 * (m - 1) as f64 / m as f64
        }
    }
}

/// `ceil(log2(psi))`, at least 1 for `psi >= 2`.
pub fn height_limit(psi: usize) -> usize {
    if psi <= 1 {
        0
    } else {
        (usize::BITS - (psi - 1).leading_zeros()) as usize
    }
}

pub fn build_tree<P: AsRef<[f64]>, R: Rng + ?Sized>(sample: &[P], height_limit: usize, rng: &mut R) -> IsolationTree {
    let mut tree = IsolationTree { nodes: Vec::new() };
    let idx: Vec<usize> = (0..sample.len()).collect();
    tree.grow(sample, idx, 0, height_limit, rng);
    tree
}

impl IsolationTree {
    fn grow<P: AsRef<[f64]>, R: Rng + ?Sized>(
        &mut self,
        sample: &[P],
        idx: Vec<usize>,
        depth: usize,
        limit: usize,
        rng: &mut R,
    ) -> u32 {
        let at = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { size: idx.len(), depth });
        if idx.len() <= 1 || depth >= limit {
            return at;
        }

        let dim = sample[idx[0]].as_ref().len();
        let mut splittable: Vec<(usize, f64, f64)> = Vec::new();
        for f in 0..dim {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = sample[i].as_ref()[f];
                (lo.min(v), hi.max(v))
            });
            let mid = lo + (hi - lo) / 2.0;
            if mid > lo && mid < hi {
                splittable.push((f, lo, hi));
            }
        }
        if splittable.is_empty() {
            return at;
        }

        let (feature, lo, hi) = splittable[rng.random_range(0..splittable.len())];
        let threshold = loop {
            let t = lo + rng.random::<f64>() * (hi - lo);
            if t > lo && t < hi {
                break t;
            }
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| sample[i].as_ref()[feature] < threshold);
        let left = self.grow(sample, left_idx, depth + 1, limit, rng);
        let right = self.grow(sample, right_idx, depth + 1, limit, rng);
        self.nodes[at as usize] = Node::Internal { feature, threshold, left, right };
        at
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn max_depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { depth, .. } => Some(*depth),
                Node::Internal { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Depth of the leaf `x` lands in plus `c(leaf size)`.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Internal { feature, threshold, left, right } => {
                    at = if x[feature] < threshold { left as usize } else { right as usize };
                }
                Node::Leaf { size, depth } => return depth as f64 + average_path_length(size),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IforestAsd {
    cfg: IforestConfig,
    trees: Vec<IsolationTree>,
    psi: usize,
    last_window_rate: f64,
    rebuilds: u64,
    /// Records learned one at a time, checked for drift once the buffer fills.
    recent: VecDeque<Vec<f64>>,
    recent_capacity: usize,
    since_check: usize,
}

impl IforestAsd {
    pub fn new(cfg: IforestConfig) -> Self {
        Self {
            cfg,
            trees: Vec::new(),
            psi: 0,
            last_window_rate: 1.0,
            rebuilds: 0,
            recent: VecDeque::new(),
            recent_capacity: 0,
            since_check: 0,
        }
    }

    pub fn trees(&self) -> &[IsolationTree] {
        &self.trees
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    /// Anomaly rate of the most recent window under the forest in place when it arrived.
    pub fn last_window_rate(&self) -> f64 {
        self.last_window_rate
    }

    /// Number of times the forest was (re)built.
    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    pub fn score_point(&self, x: &[f64]) -> Result<f64> {
        if self.trees.is_empty() {
            return Err(Error::Untrained);
        }
        let mean = self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64;
        Ok(score_from_path_length(mean, self.psi))
    }

    /// Share of `points` scoring above 0.5; 1 for an untrained forest.
    pub fn anomaly_rate(&self, points: &[&[f64]]) -> f64 {
        if self.trees.is_empty() || points.is_empty() {
            return 1.0;
        }
        let flagged = points.iter().filter(|p| self.score_point(p).map(|s| s > 0.5).unwrap_or(true)).count();
        flagged as f64 / points.len() as f64
    }

    /// ASD step: rebuild the forest from `window` iff its anomaly rate exceeds `u`.
    /// Returns whether a rebuild happened.
    pub fn adapt(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> bool {
        let rate = self.anomaly_rate(window);
        self.last_window_rate = rate;
        if rate > self.cfg.threshold_u {
            self.rebuild(window, rng);
            true
        } else {
            false
        }
    }

    fn rebuild(&mut self, window: &[&[f64]], rng: &mut DetectorRng) {
        let psi = self.cfg.psi.min(window.len()).max(1);
        let limit = height_limit(psi);
        let seeds: Vec<u64> = (0..self.cfg.trees).map(|_| rng.random()).collect();
        self.trees = seeds
            .par_iter()
            .map(|&seed| {
                let mut tree_rng = DetectorRng::seed_from_u64(seed);
                let picked = rand::seq::index::sample(&mut tree_rng, window.len(), psi);
                let sample: Vec<&[f64]> = picked.iter().map(|i| window[i]).collect();
                build_tree(&sample, limit, &mut tree_rng)
            })
            .collect();
        self.psi = psi;
        self.rebuilds += 1;
    }
}

pub fn score_from_path_length(mean_path: f64, psi: usize) -> f64 {
    (-mean_path / average_path_length(psi.max(2))).exp2()
}

impl OnlineDetector for IforestAsd {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        if window.is_empty() {
            return Err(Error::EmptyWindow);
        }
        self.adapt(window, rng);
        self.recent.clear();
        self.recent_capacity = window.len().min(1024);
        self.since_check = 0;
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        self.score_point(x)
    }

    fn learn_one(&mut self, x: &[f64], rng: &mut DetectorRng) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::Untrained);
        }
        self.recent.push_back(x.to_vec());
        if self.recent.len() > self.recent_capacity {
            self.recent.pop_front();
        }
        self.since_check += 1;
        if self.since_check >= self.recent_capacity {
            self.since_check = 0;
            let owned: Vec<Vec<f64>> = self.recent.iter().cloned().collect();
            let views: Vec<&[f64]> = owned.iter().map(Vec::as_slice).collect();
            self.adapt(&views, rng);
        }
        Ok(())
    }

    fn buffered(&self) -> usize {
        self.recent.len()
    }
}
