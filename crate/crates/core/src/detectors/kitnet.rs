//! KitNET: an ensemble of small autoencoders over correlated feature groups,
//! with an output autoencoder over the ensemble's reconstruction errors.

use serde::{Deserialize, Serialize};

use crate::detectors::autoencoder::Autoencoder;
use crate::detectors::{DetectorRng, OnlineDetector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KitnetConfig {
    /// Largest feature group one ensemble member sees.
    pub m_max: usize,
    /// Hidden/visible ratio of every autoencoder.
    pub beta: f64,
    pub lr: f64,
}

impl Default for KitnetConfig {
    fn default() -> Self {
        Self { m_max: 10, beta: 0.75, lr: 0.1 }
    }
}

/// Partition of feature indices into groups of at most `m_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMap {
    groups: Vec<Vec<usize>>,
}

impl FeatureMap {
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_partition_of(&self, dim: usize) -> bool {
        let mut seen = vec![false; dim];
        for g in &self.groups {
            if g.is_empty() {
                return false;
            }
            for &i in g {
                if i >= dim || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

enum Cluster {
    Leaf(usize),
    Merge(Box<Cluster>, Box<Cluster>, usize),
}

impl Cluster {
    fn size(&self) -> usize {
        match self {
            Cluster::Leaf(_) => 1,
            Cluster::Merge(_, _, n) => *n,
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Cluster::Leaf(i) => out.push(*i),
            Cluster::Merge(a, b, _) => {
                a.leaves(out);
                b.leaves(out);
            }
        }
    }

    fn cut(self, m_max: usize, groups: &mut Vec<Vec<usize>>) {
        if self.size() <= m_max {
            let mut g = Vec::new();
            self.leaves(&mut g);
            g.sort_unstable();
            groups.push(g);
        } else if let Cluster::Merge(a, b, _) = self {
            a.cut(m_max, groups);
            b.cut(m_max, groups);
        }
    }
}

/// Single-linkage clustering of features under `1 - |corr|`, with the
/// dendrogram cut so that no group exceeds `m_max`. Zero-variance features
/// get groups of their own.
pub fn learn_feature_map(sample: &[&[f64]], m_max: usize) -> Result<FeatureMap> {
    if sample.len() < 2 {
        return Err(Error::TooFewRecords { detector: "kitnet", need: 2, got: sample.len() });
    }
    if m_max == 0 {
        return Err(Error::InvalidConfig("kitnet.m_max must be >= 1".into()));
    }
    let dim = sample[0].len();
    let n = sample.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|f| sample.iter().map(|x| x[f]).sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = (0..dim).map(|f| sample.iter().map(|x| x[f] - mean[f]).collect()).collect();
    let norm: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let live: Vec<usize> = (0..dim).filter(|&f| norm[f] > 0.0).collect();
    for f in (0..dim).filter(|&f| norm[f] <= 0.0) {
        groups.push(vec![f]);
    }

    let distance = |a: usize, b: usize| -> f64 {
        let c: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum::<f64>() / (norm[a] * norm[b]);
        (1.0 - c.abs()).max(0.0)
    };
    // Cluster-to-cluster single-linkage distances, indexed by position in `clusters`.
    let mut clusters: Vec<Cluster> = live.iter().map(|&f| Cluster::Leaf(f)).collect();
    let mut dmat: Vec<Vec<f64>> = live.iter().map(|&a| live.iter().map(|&b| distance(a, b)).collect()).collect();
    while clusters.len() > 1 {
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for (i, row) in dmat.iter().enumerate() {
            for (j, &d) in row.iter().enumerate().skip(i + 1) {
                if d < best {
                    (bi, bj, best) = (i, j, d);
                }
            }
        }
        let b = clusters.remove(bj);
        let a = clusters.remove(bi);
        let size = a.size() + b.size();
        let merged_row: Vec<f64> =
            (0..dmat.len()).filter(|&k| k != bi && k != bj).map(|k| dmat[bi][k].min(dmat[bj][k])).collect();
        dmat.remove(bj);
        dmat.remove(bi);
        for row in dmat.iter_mut() {
            row.remove(bj);
            row.remove(bi);
        }
        for (row, &d) in dmat.iter_mut().zip(&merged_row) {
            row.push(d);
        }
        let mut last = merged_row;
        last.push(0.0);
        dmat.push(last);
        clusters.push(Cluster::Merge(Box::new(a), Box::new(b), size));
    }
    if let Some(root) = clusters.pop() {
        root.cut(m_max, &mut groups);
    }
    groups.sort_by_key(|g| g[0]);
    let map = FeatureMap { groups };
    debug_assert!(map.is_partition_of(dim));
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kitnet {
    cfg: KitnetConfig,
    feature_map: Option<FeatureMap>,
    ensemble: Vec<Autoencoder>,
    output: Option<Autoencoder>,
    /// Records consumed while the feature map was being learned.
    grace_count: usize,
}

impl Kitnet {
    pub fn new(cfg: KitnetConfig) -> Self {
        Self { cfg, feature_map: None, ensemble: Vec::new(), output: None, grace_count: 0 }
    }

    pub fn feature_map(&self) -> Option<&FeatureMap> {
        self.feature_map.as_ref()
    }

    pub fn grace_count(&self) -> usize {
        self.grace_count
    }

    fn gather(group: &[usize], x: &[f64]) -> Vec<f64> {
        group.iter().map(|&i| x[i]).collect()
    }

    fn train_record(&mut self, x: &[f64]) -> Result<()> {
        let map = self.feature_map.as_ref().ok_or(Error::GracePeriod)?;
        let mut errors = Vec::with_capacity(self.ensemble.len());
        for (ae, group) in self.ensemble.iter_mut().zip(map.groups()) {
            errors.push(ae.sgd_step(&Self::gather(group, x))?);
        }
        self.output.as_mut().ok_or(Error::GracePeriod)?.sgd_step(&errors)?;
        Ok(())
    }

    /// First window: the ensemble trains on the whole window before the
    /// output layer sees its errors, so the output's running scale is not
    /// dominated by the errors of untrained autoencoders.
    fn train_grace(&mut self, window: &[&[f64]]) -> Result<()> {
        let map = self.feature_map.as_ref().ok_or(Error::GracePeriod)?;
        for x in window {
            for (ae, group) in self.ensemble.iter_mut().zip(map.groups()) {
                ae.sgd_step(&Self::gather(group, x))?;
            }
        }
        let output = self.output.as_mut().ok_or(Error::GracePeriod)?;
        for x in window {
            let errors = self
                .ensemble
                .iter()
                .zip(map.groups())
                .map(|(ae, group)| ae.forward(&Self::gather(group, x)).map(|(_, e)| e))
                .collect::<Result<Vec<f64>>>()?;
            output.sgd_step(&errors)?;
        }
        Ok(())
    }

    pub fn score_point(&self, x: &[f64]) -> Result<f64> {
        let map = self.feature_map.as_ref().ok_or(Error::GracePeriod)?;
        let output = self.output.as_ref().ok_or(Error::GracePeriod)?;
        let errors = self
            .ensemble
            .iter()
            .zip(map.groups())
            .map(|(ae, group)| ae.forward(&Self::gather(group, x)).map(|(_, e)| e))
            .collect::<Result<Vec<f64>>>()?;
        Ok(output.forward(&errors)?.1)
    }
}

impl OnlineDetector for Kitnet {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        if self.feature_map.is_none() {
            let map = learn_feature_map(window, self.cfg.m_max)?;
            self.ensemble =
                map.groups().iter().map(|g| Autoencoder::new(g.len(), self.cfg.beta, self.cfg.lr, rng)).collect();
            self.output = Some(Autoencoder::new(map.groups().len(), self.cfg.beta, self.cfg.lr, rng));
            self.feature_map = Some(map);
            self.grace_count = window.len();
            return self.train_grace(window);
        }
        for x in window {
            self.train_record(x)?;
        }
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        self.score_point(x)
    }

    fn learn_one(&mut self, x: &[f64], _rng: &mut DetectorRng) -> Result<()> {
        self.train_record(x)
    }

    fn buffered(&self) -> usize {
        0
    }
}
