use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// How a dataset is cut into a training stream and a test stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Seeded random partition.
    Random,
    /// Seeded random partition preserving each class's share.
    Stratified,
    /// Leading records train, trailing records test.
    Chronological,
}

impl SplitMode {
    pub fn name(self) -> &'static str {
        match self {
            SplitMode::Random => "random",
            SplitMode::Stratified => "stratified",
            SplitMode::Chronological => "chronological",
        }
    }

    pub fn apply(self, ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        match self {
            SplitMode::Random => split(ds, train_fraction, false, seed),
            SplitMode::Stratified => split(ds, train_fraction, true, seed),
            SplitMode::Chronological => split_chronological(ds, train_fraction),
        }
    }
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(SplitMode::Random),
            "stratified" => Ok(SplitMode::Stratified),
            "chronological" | "time" => Ok(SplitMode::Chronological),
            other => Err(Error::InvalidConfig(format!("unknown split mode `{other}`"))),
        }
    }
}

fn train_count(n: usize, f: f64) -> Result<usize> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidFraction(f));
    }
    let k = (n as f64 * f).round() as usize;
    if k == 0 || k >= n {
        return Err(Error::InvalidFraction(f));
    }
    Ok(k)
}

fn parts(ds: &Dataset, mut train: Vec<usize>, mut test: Vec<usize>) -> (Dataset, Dataset) {
    // Both parts stay in stream order.
    train.sort_unstable();
    test.sort_unstable();
    (ds.subset(format!("{}/train", ds.name), &train), ds.subset(format!("{}/test", ds.name), &test))
}

/// Seeded train/test partition. Each part keeps the original stream order.
/// With `stratified`, each class contributes `round(n_class * f)` records to
/// the training part.
pub fn split(ds: &Dataset, train_fraction: f64, stratified: bool, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !stratified {
        let k = train_count(ds.len(), train_fraction)?;
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        idx.shuffle(&mut rng);
        let test = idx.split_off(k);
        return Ok(parts(ds, idx, test));
    }

    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, r) in ds.records.iter().enumerate() {
        let label = r.label.ok_or(Error::Unlabeled(r.seq))?;
        classes[usize::from(label)].push(i);
    }
    if classes.iter().any(Vec::is_empty) {
        return Err(Error::MissingClass);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut members in classes {
        let k = (members.len() as f64 * train_fraction).round() as usize;
        members.shuffle(&mut rng);
        test.extend(members.split_off(k));
        train.extend(members);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidFraction(train_fraction));
    }
    Ok(parts(ds, train, test))
}

/// The first `round(n * f)` records train, the rest test.
pub fn split_chronological(ds: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    let k = train_count(ds.len(), train_fraction)?;
    Ok(parts(ds, (0..k).collect(), (k..ds.len()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Record;

    fn dataset(n: usize, positives_every: usize) -> Dataset {
        let records = (0..n).map(|i| Record::labeled(i as u64, vec![i as f64], i % positives_every == 0)).collect();
        Dataset::new("d", vec!["x".into()], records)
    }

    #[test]
    fn unstratified_sizes() {
        let ds = dataset(100, 10);
        let (tr, te) = split(&ds, 0.8, false, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        assert!(tr.records.windows(2).all(|w| w[0].seq < w[1].seq));
    }

    #[test]
    fn stratified_keeps_ratio() {
        let ds = dataset(1000, 20); // 50 positives = 5%
        let (tr, te) = split(&ds, 0.8, true, 7).unwrap();
        assert_eq!(tr.positives(), 40);
        assert_eq!(te.positives(), 10);
        assert_eq!(te.len(), 200);
    }

    #[test]
    fn stratified_needs_both_classes() {
        let records = (0..10).map(|i| Record::labeled(i, vec![0.0], false)).collect();
        let ds = Dataset::new("d", vec!["x".into()], records);
        assert!(matches!(split(&ds, 0.5, true, 0), Err(Error::MissingClass)));
    }

    #[test]
    fn degenerate_fractions() {
        let ds = dataset(10, 2);
        for f in [0.0, 1.0, -0.5, 0.01, 0.99] {
            assert!(split(&ds, f, false, 0).is_err(), "{f}");
        }
        assert!(split_chronological(&ds, 1.0).is_err());
    }

    #[test]
    fn chronological_prefix() {
        let ds = dataset(10, 3);
        let (tr, te) = split_chronological(&ds, 0.7).unwrap();
        assert_eq!(tr.records.last().unwrap().seq, 6);
        assert_eq!(te.records[0].seq, 7);
    }
}
