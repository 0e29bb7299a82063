//! Rank-based AUC, the offline vs incremental experiment runner and reports.

mod auc;
mod report;

pub use auc::{auc, auc_fraction, AucFraction};
pub use report::{read_report, sorted_rows, write_report, ReportFormat, ReportRow, REPORT_HEADER, UNDEFINED_AUC};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detectors::{DetectorConfig, DetectorKind};
use crate::error::{Error, Result};
use crate::ingest::{Dataset, RunningScaler, SplitMode};
use crate::record::Record;
use crate::state::DetectorState;
use crate::windows::{train_incremental, WindowConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Scenario 1: one fit over the whole training set.
    Offline,
    /// Scenario 2: sliding-window incremental training.
    Incremental,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 2] = [ScenarioKind::Offline, ScenarioKind::Incremental];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Offline => "offline",
            ScenarioKind::Incremental => "incremental",
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ScenarioKind::Offline => 1,
            ScenarioKind::Incremental => 2,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "offline" | "s1" => Ok(ScenarioKind::Offline),
            "2" | "incremental" | "s2" => Ok(ScenarioKind::Incremental),
            other => Err(Error::InvalidConfig(format!("unknown scenario `{other}` (use 1/offline or 2/incremental)"))),
        }
    }
}

/// Everything that determines one report row apart from the data itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub dataset: String,
    pub detector: DetectorKind,
    pub scenario: ScenarioKind,
    pub config: DetectorConfig,
    pub window: WindowConfig,
    pub seed: u64,
    pub split: SplitMode,
    pub train_fraction: f64,
    pub standardize: bool,
    /// Scenario 2 only: learn each test record after scoring it.
    pub update_on_test: bool,
}

impl CellSpec {
    pub fn new(dataset: impl Into<String>, detector: DetectorKind, scenario: ScenarioKind, seed: u64) -> Self {
        Self {
            dataset: dataset.into(),
            detector,
            scenario,
            config: DetectorConfig::default(),
            window: WindowConfig::default(),
            seed,
            split: SplitMode::Stratified,
            train_fraction: 0.8,
            standardize: true,
            update_on_test: false,
        }
    }

    /// Hex SHA-256 of this spec together with the exact train and test data.
    pub fn digest(&self, train: &Dataset, test: &Dataset) -> String {
        #[derive(Serialize)]
        struct Inputs<'a> {
            spec: &'a CellSpec,
            train: String,
            test: String,
        }
        let inputs = Inputs { spec: self, train: train.content_digest(), test: test.content_digest() };
        hex::encode(Sha256::digest(serde_json::to_vec(&inputs).expect("spec serializes")))
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub row: ReportRow,
    /// Test scores in stream order.
    pub scores: Vec<f64>,
    /// Peak records held by the trainer's buffer plus the detector.
    pub peak_buffered: usize,
    pub final_version: u64,
}

fn standardized(records: &[Record], scaler: Option<&RunningScaler>) -> Result<Vec<Record>> {
    match scaler {
        Some(s) => records.iter().map(|r| s.transform(r)).collect(),
        None => Ok(records.to_vec()),
    }
}

/// Splits `ds` per `spec`, then runs [`run_scenario`].
pub fn run_cell(ds: &Dataset, spec: &CellSpec) -> Result<ScenarioOutcome> {
    let (train, test) = spec.split.apply(ds, spec.train_fraction, spec.seed)?;
    run_scenario(spec, &train, &test)
}

/// Trains per `spec.scenario` on `train`, scores `test` one record at a time
/// and reports the AUC. A single-class test split yields `auc: None`.
pub fn run_scenario(spec: &CellSpec, train: &Dataset, test: &Dataset) -> Result<ScenarioOutcome> {
    spec.config.validate()?;
    spec.window.validate()?;
    let labels: Vec<bool> =
        test.records.iter().map(|r| r.label.ok_or(Error::Unlabeled(r.seq))).collect::<Result<_>>()?;
    let started = Instant::now();
    let dim = train.dim();

    let (mut state, scaler, mut peak) = match spec.scenario {
        ScenarioKind::Offline => {
            let scaler = spec.standardize.then(|| RunningScaler::fit(dim, &train.records)).transpose()?;
            let records = standardized(&train.records, scaler.as_ref())?;
            let state = DetectorState::new(spec.detector, spec.config.clone(), spec.seed).fitted(&records)?;
            let peak = records.len() + state.buffered();
            (state, scaler, peak)
        }
        ScenarioKind::Incremental => {
            let mut scaler = spec.standardize.then(|| RunningScaler::new(dim));
            let out = train_incremental(
                spec.detector,
                &spec.config,
                spec.window,
                &train.records,
                spec.seed,
                scaler.as_mut(),
            )?;
            (out.state, scaler, out.peak_buffered)
        }
    };

    let learn = spec.update_on_test && spec.scenario == ScenarioKind::Incremental;
    let mut scores = Vec::with_capacity(test.len());
    for record in &test.records {
        let x = match &scaler {
            Some(s) => s.transform(record)?,
            None => record.clone(),
        };
        scores.push(state.score_one(&x)?.value());
        if learn {
            state.learn_one(&x)?;
            peak = peak.max(spec.window.length + state.buffered());
        }
    }

    let auc = match auc(&scores, &labels) {
        Ok(a) => Some(a),
        Err(Error::SingleClass) => {
            log::warn!("{}/{}/{}: single-class test split, AUC undefined", spec.dataset, spec.detector, spec.scenario);
            None
        }
        Err(e) => return Err(e),
    };
    let row = ReportRow {
        dataset: spec.dataset.clone(),
        detector: spec.detector,
        scenario: spec.scenario,
        seed: spec.seed,
        auc,
        n_train: train.len(),
        n_test: test.len(),
        window: spec.window.length,
        stride: spec.window.stride,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        config_digest: spec.digest(train, test),
    };
    Ok(ScenarioOutcome { row, scores, peak_buffered: peak, final_version: state.version() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::gen_synthetic;

    #[test]
    fn scenario_names() {
        assert_eq!("2".parse::<ScenarioKind>().unwrap(), ScenarioKind::Incremental);
        assert_eq!("offline".parse::<ScenarioKind>().unwrap(), ScenarioKind::Offline);
        assert!("3".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn separable_stream_scores_well_in_both_scenarios() {
        let ds = gen_synthetic(600, 2, 0.05, false, 11).unwrap();
        for scenario in ScenarioKind::ALL {
            let mut spec = CellSpec::new("synthetic", DetectorKind::Lof, scenario, 5);
            spec.window = WindowConfig::new(200, 100).unwrap();
            let out = run_cell(&ds, &spec).unwrap();
            assert!(out.row.auc.unwrap() > 0.95, "{scenario}: {:?}", out.row.auc);
            assert_eq!(out.scores.len(), out.row.n_test);
        }
    }

    #[test]
    fn rows_are_deterministic_and_digest_tracks_inputs() {
        let ds = gen_synthetic(400, 3, 0.05, true, 2).unwrap();
        let spec = CellSpec::new("synthetic", DetectorKind::IforestAsd, ScenarioKind::Incremental, 9);
        let a = run_cell(&ds, &spec).unwrap();
        let b = run_cell(&ds, &spec).unwrap();
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.row.config_digest, b.row.config_digest);
        let mut other = spec.clone();
        other.config.iforest.trees = 50;
        assert_ne!(run_cell(&ds, &other).unwrap().row.config_digest, a.row.config_digest);
    }

    #[test]
    fn single_class_test_split_is_undefined() {
        let ds = gen_synthetic(200, 2, 0.05, false, 4).unwrap();
        let (train, mut test) = crate::ingest::split_chronological(&ds, 0.5).unwrap();
        test.records.retain(|r| r.label == Some(false));
        let spec = CellSpec::new("synthetic", DetectorKind::Abod, ScenarioKind::Offline, 1);
        assert_eq!(run_scenario(&spec, &train, &test).unwrap().row.auc, None);
    }
}
