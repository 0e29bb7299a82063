//! Labeled tabular datasets: CSV loading, standardization, train/test
//! splitting and synthetic stream generation.

mod csv_io;
mod scaler;
mod split;
mod synthetic;

pub use csv_io::{load_csv, write_csv, CategoricalColumn, CsvOptions};
pub use scaler::RunningScaler;
pub use split::{split, split_chronological, SplitMode};
pub use synthetic::{gen_synthetic, SyntheticConfig};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::record::Record;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_points: usize,
    pub n_features: usize,
    /// `(negative %, positive %)` computed from the labels; `None` when unlabeled.
    pub neg_pos_ratio: Option<(f64, f64)>,
}

impl DatasetMeta {
    pub fn from_records(records: &[Record], n_features: usize) -> Self {
        let labels: Vec<bool> = records.iter().filter_map(|r| r.label).collect();
        let neg_pos_ratio = (!labels.is_empty()).then(|| {
            let pos = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64 * 100.0;
            (100.0 - pos, pos)
        });
        Self { n_points: records.len(), n_features, neg_pos_ratio }
    }
}

/// What loading had to do to the raw file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadStats {
    /// Data rows discarded for unparseable numeric cells.
    pub dropped_rows: usize,
    /// Columns integer-encoded by first appearance.
    pub categorical: Vec<CategoricalColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<Record>,
    pub feature_names: Vec<String>,
    pub meta: DatasetMeta,
    pub load_stats: LoadStats,
}

impl Dataset {
    pub fn new(name: impl Into<String>, feature_names: Vec<String>, records: Vec<Record>) -> Self {
        let meta = DatasetMeta::from_records(&records, feature_names.len());
        Self { name: name.into(), records, feature_names, meta, load_stats: LoadStats::default() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = Option<bool>> + '_ {
        self.records.iter().map(|r| r.label)
    }

    pub fn positives(&self) -> usize {
        self.records.iter().filter(|r| r.label == Some(true)).count()
    }

    /// Hex SHA-256 over feature names, record order, exact feature bits and labels.
    pub fn content_digest(&self) -> String {
        let mut h = Sha256::new();
        for name in &self.feature_names {
            h.update(name.as_bytes());
            h.update([0]);
        }
        for r in &self.records {
            h.update(r.seq.to_le_bytes());
            for x in &r.features {
                h.update(x.to_bits().to_le_bytes());
            }
            h.update([match r.label {
                None => 2,
                Some(l) => u8::from(l),
            }]);
        }
        hex::encode(h.finalize())
    }

    /// Subset keeping the given record positions, in the given order.
    pub(crate) fn subset(&self, name: String, idx: &[usize]) -> Dataset {
        let records = idx.iter().map(|&i| self.records[i].clone()).collect();
        Dataset::new(name, self.feature_names.clone(), records)
    }
}
