use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::record::Record;

/// Length of the mean shift reached by the last record of a drifting stream.
pub const DRIFT_DISTANCE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub d: usize,
    pub contamination: f64,
    pub drift: bool,
    pub seed: u64,
}

/// Labeled stream: standard-Gaussian inliers and outliers drawn uniformly in
/// direction with radius uniform in `[4, 6]`. With drift, every record is
/// shifted along the diagonal by `DRIFT_DISTANCE * t / (n - 1)`.
/// Exactly `round(n * contamination)` records are outliers, at uniformly
/// random positions.
pub fn gen_synthetic(n: usize, d: usize, contamination: f64, drift: bool, seed: u64) -> Result<Dataset> {
    if !(contamination > 0.0 && contamination < 0.5) || (n as f64) * contamination < 1.0 {
        return Err(Error::InvalidContamination(contamination));
    }
    if d == 0 {
        return Err(Error::InvalidConfig("synthetic streams need d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_out = ((n as f64) * contamination).round() as usize;
    let mut is_outlier = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, n_out) {
        is_outlier[i] = true;
    }

    let axis = 1.0 / (d as f64).sqrt();
    let records = (0..n)
        .map(|t| {
            let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if is_outlier[t] {
                let norm = crate::linalg::norm(&x).max(f64::MIN_POSITIVE);
                let radius = rng.random_range(4.0..=6.0);
                x.iter_mut().for_each(|v| *v *= radius / norm);
            }
            if drift && n > 1 {
                let shift = DRIFT_DISTANCE * t as f64 / (n - 1) as f64 * axis;
                x.iter_mut().for_each(|v| *v += shift);
            }
            Record::labeled(t as u64, x, is_outlier[t])
        })
        .collect();
    let names = (0..d).map(|i| format!("f{i}")).collect();
    Ok(Dataset::new("synthetic", names, records))
}

impl SyntheticConfig {
    pub fn generate(&self) -> Result<Dataset> {
        gen_synthetic(self.n, self.d, self.contamination, self.drift, self.seed)
    }
}
