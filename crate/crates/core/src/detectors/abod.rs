//! Angle-based outlier detection, exact all-pairs form.
//!
//! For a query `q` and every unordered pair `(B, C)` of reference points the
//! cosine of the angle between `B - q` and `C - q` is collected with weight
//! `1 / (|B - q|^2 |C - q|^2)`. Points inside a cluster see a wide spread of
//! angles; outliers see all other points under nearly the same angle, so the
//! weighted variance (the raw factor) is small. The emitted score is the
//! negated factor.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::detectors::{reference_sample, DetectorRng, OnlineDetector};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::record::{AnomalyScore, Record};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbodConfig {
    pub max_reference: usize,
}

impl Default for AbodConfig {
    fn default() -> Self {
        Self { max_reference: 512 }
    }
}

/// Raw angle-based outlier factor (weighted variance of cosines).
pub fn abod_factor<P: AsRef<[f64]>>(reference: &[P], query: &[f64]) -> Result<f64> {
    let d = query.len();
    let mut diffs: Vec<f64> = Vec::with_capacity(reference.len() * d);
    let mut sq_norms: Vec<f64> = Vec::with_capacity(reference.len());
    for p in reference {
        let p = p.as_ref();
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        let start = diffs.len();
        diffs.extend(p.iter().zip(query).map(|(a, b)| a - b));
        let n2 = dot(&diffs[start..], &diffs[start..]);
        if n2 > 0.0 {
            sq_norms.push(n2);
        } else {
            diffs.truncate(start);
        }
    }
    let m = sq_norms.len();
    if m < 2 {
        return Err(Error::NoValidPairs);
    }

    // West's weighted incremental mean/variance.
    let (mut w_sum, mut mean, mut s) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..m {
        let a = &diffs[i * d..(i + 1) * d];
        for j in (i + 1)..m {
            let b = &diffs[j * d..(j + 1) * d];
            let nn = sq_norms[i] * sq_norms[j];
            let cos = dot(a, b) / nn.sqrt();
            let w = 1.0 / nn;
            w_sum += w;
            let delta = cos - mean;
            mean += delta * w / w_sum;
            s += w * delta * (cos - mean);
        }
    }
    Ok((s / w_sum).max(0.0))
}

pub fn abod_score(reference: &[Record], query: &Record) -> Result<AnomalyScore> {
    let points: Vec<&[f64]> = reference.iter().map(|r| r.features.as_slice()).collect();
    Ok(AnomalyScore(0.0 - abod_factor(&points, &query.features)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbodDetector {
    cfg: AbodConfig,
    reference: VecDeque<Vec<f64>>,
    capacity: usize,
}

impl AbodDetector {
    pub fn new(cfg: AbodConfig) -> Self {
        Self { cfg, reference: VecDeque::new(), capacity: 0 }
    }
}

impl OnlineDetector for AbodDetector {
    fn fit_window(&mut self, window: &[&[f64]], rng: &mut DetectorRng) -> Result<()> {
        let sample = reference_sample(window, self.cfg.max_reference, rng);
        if sample.len() < 2 {
            return Err(Error::TooFewRecords { detector: "abod", need: 2, got: sample.len() });
        }
        self.capacity = sample.len();
        self.reference = sample.iter().map(|p| p.to_vec()).collect();
        Ok(())
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        if self.reference.is_empty() {
            return Err(Error::Untrained);
        }
        let (a, b) = self.reference.as_slices();
        let points: Vec<&[f64]> = a.iter().chain(b).map(Vec::as_slice).collect();
        match abod_factor(&points, x) {
            Ok(f) => Ok(0.0 - f),
            // The query coincides with all but at most one reference point:
            // it sits on the densest spot there is.
            Err(Error::NoValidPairs) => Ok(f64::MIN),
            Err(e) => Err(e),
        }
    }

    fn learn_one(&mut self, x: &[f64], _rng: &mut DetectorRng) -> Result<()> {
        if self.reference.is_empty() {
            return Err(Error::Untrained);
        }
        self.reference.push_back(x.to_vec());
        while self.reference.len() > self.capacity {
            self.reference.pop_front();
        }
        Ok(())
    }

    fn buffered(&self) -> usize {
        self.reference.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_end_point_has_zero_variance() {
        let reference: Vec<Vec<f64>> = (1..8).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let f = abod_factor(&reference, &[0.0, 0.0]).unwrap();
        assert!(f < 1e-15, "{f}");
        let interior = abod_factor(&reference, &[4.0, 8.0]).unwrap();
        assert!(interior > f);
    }

    #[test]
    fn pairs_with_zero_difference_are_skipped() {
        let reference = vec![vec![0.0], vec![0.0], vec![1.0], vec![-1.0]];
        // Only (1, -1) remains: a single pair has zero variance.
        assert_eq!(abod_factor(&reference, &[0.0]).unwrap(), 0.0);
        let reference = vec![vec![0.0], vec![1.0]];
        assert!(matches!(abod_factor(&reference, &[0.0]), Err(Error::NoValidPairs)));
    }

    #[test]
    fn square_center_beats_far_point() {
        let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let center = abod_factor(&square, &[0.5, 0.5]).unwrap();
        let far = abod_factor(&square, &[10.0, 10.0]).unwrap();
        assert!(center > far);
    }
}
