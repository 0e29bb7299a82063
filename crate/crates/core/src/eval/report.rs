use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::eval::ScenarioKind;

pub const REPORT_HEADER: [&str; 11] = [
    "dataset",
    "detector",
    "scenario",
    "seed",
    "auc",
    "n_train",
    "n_test",
    "window",
    "stride",
    "wall_ms",
    "config_digest",
];

/// Written in place of an AUC when the test split holds a single class.
pub const UNDEFINED_AUC: &str = "undefined";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub detector: DetectorKind,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub auc: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub window: usize,
    pub stride: usize,
    pub wall_ms: f64,
    /// Hex SHA-256 of every input that determines the row.
    pub config_digest: String,
}

impl ReportRow {
    fn sort_key(&self) -> (&str, DetectorKind, ScenarioKind, u64) {
        (&self.dataset, self.detector, self.scenario, self.seed)
    }

    fn csv_fields(&self) -> [String; 11] {
        [
            self.dataset.clone(),
            self.detector.to_string(),
            self.scenario.to_string(),
            self.seed.to_string(),
            self.auc.map_or_else(|| UNDEFINED_AUC.to_string(), |a| a.to_string()),
            self.n_train.to_string(),
            self.n_test.to_string(),
            self.window.to_string(),
            self.stride.to_string(),
            format!("{:.3}", self.wall_ms),
            self.config_digest.clone(),
        ]
    }

    fn from_csv(rec: &csv::StringRecord, line: usize) -> Result<Self> {
        let bad = |what: &str| Error::InvalidConfig(format!("report line {line}: bad {what}"));
        if rec.len() != REPORT_HEADER.len() {
            return Err(bad("column count"));
        }
        let num = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(REPORT_HEADER[i]));
        Ok(Self {
            dataset: rec[0].to_string(),
            detector: rec[1].parse()?,
            scenario: rec[2].parse()?,
            seed: rec[3].parse().map_err(|_| bad("seed"))?,
            auc: match &rec[4] {
                UNDEFINED_AUC => None,
                s => Some(s.parse().map_err(|_| bad("auc"))?),
            },
            n_train: num(5)?,
            n_test: num(6)?,
            window: num(7)?,
            stride: num(8)?,
            wall_ms: rec[9].parse().map_err(|_| bad("wall_ms"))?,
            config_digest: rec[10].to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

impl ReportFormat {
    /// `.jsonl`/`.json` select JSON lines; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => ReportFormat::Jsonl,
            _ => ReportFormat::Csv,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" | "json-lines" | "json" => Ok(ReportFormat::Jsonl),
            other => Err(Error::InvalidConfig(format!("unknown report format `{other}`"))),
        }
    }
}

/// Rows sorted by (dataset, detector, scenario, seed), stable for equal keys.
pub fn sorted_rows(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    rows
}

pub fn write_report(rows: &[ReportRow], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let rows = sorted_rows(rows);
    if let Some(dir) = path.as_ref().parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = File::create(path.as_ref())?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            w.write_record(REPORT_HEADER)?;
            for row in &rows {
                w.write_record(row.csv_fields())?;
            }
            w.flush()?;
        }
        ReportFormat::Jsonl => {
            let mut w = BufWriter::new(file);
            for row in &rows {
                serde_json::to_writer(&mut w, row)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    match ReportFormat::from_path(path) {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_path(path)?;
            if r.headers()?.iter().ne(REPORT_HEADER) {
                return Err(Error::InvalidConfig(format!("{}: not a report header", path.display())));
            }
            r.records().enumerate().map(|(i, rec)| ReportRow::from_csv(&rec?, i + 2)).collect()
        }
        ReportFormat::Jsonl => BufReader::new(File::open(path)?)
            .lines()
            .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
            .map(|l| Ok(serde_json::from_str(&l?)?))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dataset: &str, detector: DetectorKind, scenario: ScenarioKind, auc: Option<f64>) -> ReportRow {
        ReportRow {
            dataset: dataset.into(),
            detector,
            scenario,
            seed: 42,
            auc,
            n_train: 80,
            n_test: 20,
            window: 256,
            stride: 128,
            wall_ms: 1.25,
            config_digest: "ab".repeat(32),
        }
    }

    fn sample() -> Vec<ReportRow> {
        vec![
            row("b", DetectorKind::Lof, ScenarioKind::Incremental, Some(0.123456789)),
            row("a", DetectorKind::Abod, ScenarioKind::Offline, None),
            row("a", DetectorKind::Ocsvm, ScenarioKind::Offline, Some(1.0 / 3.0)),
        ]
    }

    #[test]
    fn csv_round_trip_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&sample(), &path, ReportFormat::Csv).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back, sorted_rows(&sample()));
        assert_eq!(back[0].detector, DetectorKind::Ocsvm);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(
            text.starts_with("dataset,detector,scenario,seed,auc,n_train,n_test,window,stride,wall_ms,config_digest\n")
        );
        assert!(text.contains(",undefined,"));
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_report(&sample(), &path, ReportFormat::Jsonl).unwrap();
        assert_eq!(read_report(&path).unwrap(), sorted_rows(&sample()));
    }

    #[test]
    fn empty_report_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(write_report(&[], dir.path().join("x.csv"), ReportFormat::Csv), Err(Error::EmptyReport)));
    }
}
