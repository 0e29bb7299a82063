use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::Record;

/// Single-pass (Welford) per-feature mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningScaler {
    count: u64,
    mean: Vec<f64>,
    /// Sum of squared deviations from the running mean.
    m2: Vec<f64>,
}

impl RunningScaler {
    pub fn new(dim: usize) -> Self {
        Self { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn fit<'a>(dim: usize, records: impl IntoIterator<Item = &'a Record>) -> Result<Self> {
        let mut s = Self::new(dim);
        for r in records {
            s.update(r)?;
        }
        Ok(s)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn update(&mut self, record: &Record) -> Result<()> {
        record.check_dim(self.mean.len())?;
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(&record.features) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
        Ok(())
    }

    /// Sample variance `m2 / (count - 1)`.
    pub fn variance(&self) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(Error::InsufficientStatistics(self.count));
        }
        let denom = (self.count - 1) as f64;
        Ok(self.m2.iter().map(|m2| m2 / denom).collect())
    }

    /// z-scores every feature; zero-variance features map to 0.
    pub fn transform(&self, record: &Record) -> Result<Record> {
        record.check_dim(self.mean.len())?;
        let var = self.variance()?;
        let features = record
            .features
            .iter()
            .zip(&self.mean)
            .zip(&var)
            .map(|((&x, &m), &v)| if v > 0.0 { (x - m) / v.sqrt() } else { 0.0 })
            .collect();
        Ok(Record { seq: record.seq, features, label: record.label })
    }
}
