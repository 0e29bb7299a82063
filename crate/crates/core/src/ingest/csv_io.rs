use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, LoadStats};
use crate::record::Record;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub label_column: String,
    pub drop_columns: Vec<String>,
    /// Raw label value -> outlier flag. Without a mapping, labels must read as
    /// `0`/`1` (any numeric spelling) or `true`/`false`.
    pub label_map: Option<Vec<(String, bool)>>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self { label_column: label_column.into(), ..Default::default() }
    }

    /// Parses `no=0,yes=1` style mappings.
    pub fn parse_label_map(spec: &str) -> Result<Vec<(String, bool)>> {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|pair| {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidConfig(format!("label map entry `{pair}` is not key=value")))?;
                let flag = match v.trim() {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::InvalidConfig(format!("label map value `{other}` must be 0 or 1"))),
                };
                Ok((k.trim().to_string(), flag))
            })
            .collect()
    }

    fn label(&self, raw: &str, row: usize) -> Result<bool> {
        let bad = || Error::BadLabel { row, value: raw.to_string() };
        if let Some(map) = &self.label_map {
            return map.iter().find(|(k, _)| k == raw).map(|(_, v)| *v).ok_or_else(bad);
        }
        match raw.to_ascii_lowercase().as_str() {
            "true" => return Ok(true),
            "false" => return Ok(false),
            _ => {}
        }
        match raw.parse::<f64>() {
            Ok(0.0) => Ok(false),
            Ok(1.0) => Ok(true),
            _ => Err(bad()),
        }
    }
}

/// Integer codes assigned to a non-numeric column, in first-appearance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    pub name: String,
    pub levels: Vec<String>,
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a headered CSV. A column is numeric when most of its non-empty cells
/// parse as finite numbers; rows with an unparseable cell in a numeric column
/// are dropped. Other columns are integer-encoded by first appearance.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let label_idx = header
        .iter()
        .position(|h| h == &opts.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(opts.label_column.clone()))?;
    for d in &opts.drop_columns {
        if !header.contains(d) {
            return Err(Error::InvalidConfig(format!("drop column `{d}` not in header")));
        }
    }
    let feature_cols: Vec<usize> =
        (0..header.len()).filter(|&i| i != label_idx && !opts.drop_columns.contains(&header[i])).collect();

    let rows: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(Error::NoUsableRows(path.to_path_buf()));
    }

    let numeric: Vec<bool> = feature_cols
        .iter()
        .map(|&c| {
            let (mut filled, mut parsed) = (0usize, 0usize);
            for row in &rows {
                let cell = &row[c];
                if !cell.is_empty() {
                    filled += 1;
                    parsed += usize::from(parse_finite(cell).is_some());
                }
            }
            filled > 0 && parsed * 2 > filled
        })
        .collect();

    let mut kept: Vec<(usize, &csv::StringRecord)> = Vec::new();
    let mut dropped_rows = 0;
    for (i, row) in rows.iter().enumerate() {
        let ok = feature_cols.iter().zip(&numeric).all(|(&c, &is_num)| !is_num || parse_finite(&row[c]).is_some());
        if ok {
            kept.push((i, row));
        } else {
            dropped_rows += 1;
        }
    }
    if kept.is_empty() {
        return Err(Error::NoUsableRows(path.to_path_buf()));
    }

    let mut levels: Vec<Vec<String>> = vec![Vec::new(); feature_cols.len()];
    let mut records = Vec::with_capacity(kept.len());
    for (i, row) in kept {
        let mut features = Vec::with_capacity(feature_cols.len());
        for (j, &c) in feature_cols.iter().enumerate() {
            let cell = &row[c];
            if numeric[j] {
                features.push(parse_finite(cell).expect("checked above"));
            } else {
                let code = match levels[j].iter().position(|l| l == cell) {
                    Some(p) => p,
                    None => {
                        levels[j].push(cell.to_string());
                        levels[j].len() - 1
                    }
                };
                features.push(code as f64);
            }
        }
        // Data row numbers are 1-based after the header for error messages.
        let label = opts.label(&row[label_idx], i + 1)?;
        records.push(Record::labeled(i as u64, features, label));
    }

    let feature_names: Vec<String> = feature_cols.iter().map(|&c| header[c].clone()).collect();
    let categorical = feature_cols
        .iter()
        .zip(&numeric)
        .zip(levels)
        .filter(|((_, &is_num), _)| !is_num)
        .map(|((&c, _), levels)| CategoricalColumn { name: header[c].clone(), levels })
        .collect();
    if dropped_rows > 0 {
        log::warn!("{}: dropped {dropped_rows} rows with unparseable numeric cells", path.display());
    }
    let name = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let mut ds = Dataset::new(name, feature_names, records);
    ds.load_stats = LoadStats { dropped_rows, categorical };
    Ok(ds)
}

/// Writes `f0..f{d-1}` style columns (the dataset's feature names) plus `label`.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = ds.feature_names.clone();
    header.push("label".to_string());
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in &ds.records {
        row.clear();
        row.extend(r.features.iter().map(|v| v.to_string()));
        row.push(match r.label {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn four_rows() {
        let f = write("a,b,Class\n1,2,0\n3,4,1\n5,6,0\n7,8.5,0\n");
        let ds = load_csv(f.path(), &CsvOptions::new("Class")).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.feature_names, vec!["a", "b"]);
        assert_eq!(ds.records[3].features, vec![7.0, 8.5]);
        assert_eq!(ds.positives(), 1);
        assert_eq!(ds.meta.neg_pos_ratio, Some((75.0, 25.0)));
    }

    #[test]
    fn mapped_labels() {
        let f = write("x,churn\n1,yes\n2,no\n3,no\n");
        let mut opts = CsvOptions::new("churn");
        assert!(matches!(load_csv(f.path(), &opts), Err(Error::BadLabel { row: 1, .. })));
        opts.label_map = Some(CsvOptions::parse_label_map("no=0,yes=1").unwrap());
        let ds = load_csv(f.path(), &opts).unwrap();
        let labels: Vec<_> = ds.labels().collect();
        assert_eq!(labels, vec![Some(true), Some(false), Some(false)]);
    }

    #[test]
    fn categorical_and_dropped_rows() {
        let f = write("id,gender,bmi,stroke\n1,Male,22.5,0\n2,Female,N/A,1\n3,Female,30.1,1\n4,Other,27,0\n");
        let mut opts = CsvOptions::new("stroke");
        opts.drop_columns = vec!["id".into()];
        let ds = load_csv(f.path(), &opts).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.load_stats.dropped_rows, 1);
        assert_eq!(ds.feature_names, vec!["gender", "bmi"]);
        // Codes follow first appearance among kept rows.
        let genders: Vec<f64> = ds.records.iter().map(|r| r.features[0]).collect();
        assert_eq!(genders, vec![0.0, 1.0, 2.0]);
        assert_eq!(ds.load_stats.categorical[0].levels, vec!["Male", "Female", "Other"]);
        let seqs: Vec<u64> = ds.records.iter().map(|r| r.seq).collect();
        assert_eq!(seqs, vec![0, 2, 3]);
    }

    #[test]
    fn error_paths() {
        let f = write("a,b\n1,0\n");
        assert!(matches!(load_csv(f.path(), &CsvOptions::new("label")), Err(Error::MissingLabelColumn(_))));
        let f = write("");
        assert!(load_csv(f.path(), &CsvOptions::new("label")).is_err());
        let f = write("a,label\n");
        assert!(matches!(load_csv(f.path(), &CsvOptions::new("label")), Err(Error::NoUsableRows(_))));
        let f = write("a,label\nx1,0\n2,1\n3,0\n");
        // Column `a` is numeric by majority; the `x1` row is dropped.
        let ds = load_csv(f.path(), &CsvOptions::new("label")).unwrap();
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn label_map_syntax() {
        assert!(CsvOptions::parse_label_map("a=2").is_err());
        assert!(CsvOptions::parse_label_map("a").is_err());
        assert_eq!(CsvOptions::parse_label_map("N=0, Y=1").unwrap(), vec![("N".into(), false), ("Y".into(), true)]);
    }
}
