use std::path::{Path, PathBuf};

use serde::Deserialize;

use odstream::eval::{CellSpec, ReportFormat, ScenarioKind};
use odstream::ingest::{CsvOptions, SplitMode, SyntheticConfig};
use odstream::windows::{WindowConfig, DEFAULT_STRIDE, DEFAULT_WINDOW};
use odstream::{DetectorConfig, DetectorKind, Error, Result};

/// Seed used when neither flags, file nor `ODSTREAM_SEED` give one.
pub const FALLBACK_SEED: u64 = 42;
/// Label column assumed when none is configured; matches `gen` output.
pub const DEFAULT_LABEL_COL: &str = "label";
pub const SEED_ENV: &str = "ODSTREAM_SEED";

/// Detector sections accepted in a config file, e.g. `[lof] k = 10`.
const DETECTOR_SECTIONS: [&str; 7] = ["ocsvm", "iforest", "lof", "abod", "storm", "kitnet", "cad"];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv { name: String, path: PathBuf, options: CsvOptions },
    Synthetic { name: String, config: SyntheticConfig },
}

impl DatasetSource {
    pub fn name(&self) -> &str {
        match self {
            DatasetSource::Csv { name, .. } | DatasetSource::Synthetic { name, .. } => name,
        }
    }
}

/// Fully resolved experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub datasets: Vec<DatasetSource>,
    pub detectors: Vec<DetectorKind>,
    pub scenarios: Vec<ScenarioKind>,
    pub window: WindowConfig,
    pub seeds: Vec<u64>,
    pub train_fraction: f64,
    pub split: SplitMode,
    pub standardize: bool,
    pub update_on_test: bool,
    pub detector_config: DetectorConfig,
    pub out: PathBuf,
    pub format: ReportFormat,
    /// Parallel grid cells; `None` uses every core.
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// One spec per (dataset, detector, scenario, seed), in that nesting order.
    pub fn cells(&self) -> Vec<(usize, CellSpec)> {
        let mut cells = Vec::new();
        for (d, ds) in self.datasets.iter().enumerate() {
            for &detector in &self.detectors {
                for &scenario in &self.scenarios {
                    for &seed in &self.seeds {
                        let spec = CellSpec {
                            dataset: ds.name().to_string(),
                            detector,
                            scenario,
                            config: self.detector_config.clone(),
                            window: self.window,
                            seed,
                            split: self.split,
                            train_fraction: self.train_fraction,
                            standardize: self.standardize,
                            update_on_test: self.update_on_test,
                        };
                        cells.push((d, spec));
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDataset {
    name: Option<String>,
    path: Option<PathBuf>,
    label_col: Option<String>,
    label_map: Option<String>,
    #[serde(default)]
    drop: Vec<String>,
    synthetic: Option<SyntheticConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    dataset: Vec<FileDataset>,
    data: Option<PathBuf>,
    label_col: Option<String>,
    label_map: Option<String>,
    drop: Option<Vec<String>>,
    detectors: Option<Vec<String>>,
    scenarios: Option<Vec<toml::Value>>,
    window: Option<usize>,
    stride: Option<usize>,
    seeds: Option<Vec<u64>>,
    seed: Option<u64>,
    train_fraction: Option<f64>,
    split: Option<String>,
    standardize: Option<bool>,
    update_on_test: Option<bool>,
    out: Option<PathBuf>,
    format: Option<String>,
    jobs: Option<usize>,
}

/// Command-line values; every field overrides the config file when set.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub data: Vec<PathBuf>,
    pub label_col: Option<String>,
    pub label_map: Option<String>,
    pub drop: Vec<String>,
    pub detectors: Option<String>,
    pub scenarios: Option<String>,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub seeds: Vec<u64>,
    pub train_fraction: Option<f64>,
    pub split: Option<String>,
    pub standardize: Option<bool>,
    pub update_on_test: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub jobs: Option<usize>,
    /// `key=value` detector settings such as `lof.k=5`.
    pub set: Vec<String>,
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: impl IntoIterator<Item = String>) -> Result<Vec<T>> {
    items
        .into_iter()
        .flat_map(|s| s.split(',').map(|p| p.trim().to_string()).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse())
        .collect()
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned())
}

fn csv_source(
    name: Option<String>,
    path: PathBuf,
    label_col: Option<String>,
    label_map: Option<&str>,
    drop: Vec<String>,
) -> Result<DatasetSource> {
    let mut options = CsvOptions::new(label_col.unwrap_or_else(|| DEFAULT_LABEL_COL.to_string()));
    options.drop_columns = drop;
    if let Some(map) = label_map {
        options.label_map = Some(CsvOptions::parse_label_map(map)?);
    }
    Ok(DatasetSource::Csv { name: name.unwrap_or_else(|| stem(&path)), path, options })
}

/// Splits a TOML document into detector settings and the remaining table.
fn detector_settings(table: &mut toml::Table, cfg: &mut DetectorConfig) -> Result<()> {
    for section in DETECTOR_SECTIONS {
        let Some(value) = table.remove(section) else { continue };
        let toml::Value::Table(entries) = value else {
            return Err(Error::InvalidConfig(format!("`{section}` must be a table")));
        };
        for (key, v) in entries {
            cfg.set(&format!("{section}.{key}"), &value_text(&v))?;
        }
    }
    Ok(())
}

fn read_file(path: &Path, detector_config: &mut DetectorConfig) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    detector_settings(&mut table, detector_config)?;
    let mut file: FileConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    // Relative data paths are relative to the config file.
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    file.dataset.iter_mut().filter_map(|d| d.path.as_mut()).for_each(rebase);
    file.data.iter_mut().for_each(rebase);
    Ok(file)
}

impl RunConfig {
    /// Resolves flags over the optional config file over built-in defaults.
    pub fn resolve(o: Overrides) -> Result<Self> {
        let mut detector_config = DetectorConfig::default();
        let file = match &o.config {
            Some(path) => read_file(path, &mut detector_config)?,
            None => FileConfig::default(),
        };
        for kv in &o.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("--set expects key=value, got `{kv}`")))?;
            detector_config.set(k.trim(), v.trim())?;
        }
        detector_config.validate()?;

        let label_col = o.label_col.clone().or(file.label_col);
        let label_map = o.label_map.clone().or(file.label_map);
        let drop = if o.drop.is_empty() { file.drop.unwrap_or_default() } else { o.drop.clone() };
        let datasets = if !o.data.is_empty() {
            o.data
                .iter()
                .map(|p| csv_source(None, p.clone(), label_col.clone(), label_map.as_deref(), drop.clone()))
                .collect::<Result<Vec<_>>>()?
        } else {
            let mut out = Vec::new();
            if let Some(p) = file.data {
                out.push(csv_source(None, p, label_col.clone(), label_map.as_deref(), drop.clone())?);
            }
            for d in file.dataset {
                out.push(match (d.path, d.synthetic) {
                    (Some(path), None) => csv_source(
                        d.name,
                        path,
                        d.label_col.or_else(|| label_col.clone()),
                        d.label_map.as_deref().or(label_map.as_deref()),
                        if d.drop.is_empty() { drop.clone() } else { d.drop },
                    )?,
                    (None, Some(config)) => {
                        DatasetSource::Synthetic { name: d.name.unwrap_or_else(|| "synthetic".into()), config }
                    }
                    _ => {
                        return Err(Error::InvalidConfig(
                            "each [[dataset]] needs exactly one of `path` or `synthetic`".into(),
                        ))
                    }
                });
            }
            out
        };
        if datasets.is_empty() {
            return Err(Error::InvalidConfig("no dataset given (--data or a config file)".into()));
        }

        let detectors = match o.detectors.clone().map(|s| vec![s]).or(file.detectors) {
            Some(list) => parse_list(list)?,
            None => DetectorKind::ALL.to_vec(),
        };
        let scenarios = match o.scenarios.clone().map(|s| vec![s]) {
            Some(list) => parse_list(list)?,
            None => match file.scenarios {
                Some(list) => parse_list(list.iter().map(value_text))?,
                None => ScenarioKind::ALL.to_vec(),
            },
        };
        if detectors.is_empty() || scenarios.is_empty() {
            return Err(Error::InvalidConfig("detector and scenario lists must be non-empty".into()));
        }

        let seeds = if !o.seeds.is_empty() {
            o.seeds.clone()
        } else if let Some(s) = file.seeds {
            s
        } else if let Some(s) = file.seed {
            vec![s]
        } else {
            vec![env_seed()?.unwrap_or(FALLBACK_SEED)]
        };

        let window = WindowConfig::new(
            o.window.or(file.window).unwrap_or(DEFAULT_WINDOW),
            o.stride.or(file.stride).unwrap_or(DEFAULT_STRIDE),
        )?;
        let split = match o.split.clone().or(file.split) {
            Some(s) => s.parse()?,
            None => SplitMode::Stratified,
        };
        let out = o.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("report.csv"));
        let format = match o.format.clone().or(file.format) {
            Some(f) => f.parse()?,
            None => ReportFormat::from_path(&out),
        };
        let train_fraction = o.train_fraction.or(file.train_fraction).unwrap_or(0.8);
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidFraction(train_fraction));
        }
        let jobs = o.jobs.or(file.jobs);
        if jobs == Some(0) {
            return Err(Error::InvalidConfig("jobs must be >= 1".into()));
        }

        Ok(Self {
            datasets,
            detectors,
            scenarios,
            window,
            seeds,
            train_fraction,
            split,
            standardize: o.standardize.or(file.standardize).unwrap_or(true),
            update_on_test: o.update_on_test.or(file.update_on_test).unwrap_or(false),
            detector_config,
            out,
            format,
            jobs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn file_values_and_flag_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "exp.toml",
            r#"
detectors = ["lof", "abod"]
scenarios = [1, "incremental"]
window = 64
stride = 32
seeds = [1, 2]
out = "r.jsonl"

[[dataset]]
name = "brain"
path = "brain.csv"
label_col = "stroke"
label_map = "No=0,Yes=1"

[lof]
k = 7
"#,
        );
        let o = Overrides { config: Some(cfg), window: Some(100), set: vec!["cad.k=3".into()], ..Default::default() };
        let rc = RunConfig::resolve(o).unwrap();
        assert_eq!(rc.detectors, vec![DetectorKind::Lof, DetectorKind::Abod]);
        assert_eq!(rc.scenarios, ScenarioKind::ALL.to_vec());
        assert_eq!(rc.window, WindowConfig { length: 100, stride: 32 });
        assert_eq!(rc.detector_config.lof.k, 7);
        assert_eq!(rc.detector_config.cad.k, 3);
        assert_eq!(rc.format, ReportFormat::Jsonl);
        assert_eq!(rc.cells().len(), 2 * 2 * 2);
        match &rc.datasets[0] {
            DatasetSource::Csv { name, path, options } => {
                assert_eq!(name, "brain");
                assert_eq!(path, &dir.path().join("brain.csv"));
                assert!(options.label_map.is_some());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let no_data = Overrides::default();
        assert!(RunConfig::resolve(no_data).is_err());
        let bad_detector = Overrides {
            data: vec!["x.csv".into()],
            label_col: Some("y".into()),
            detectors: Some("lof,nope".into()),
            ..Default::default()
        };
        let err = RunConfig::resolve(bad_detector).unwrap_err().to_string();
        assert!(err.contains("knn-cad"), "{err}");
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "bad.toml", "windw = 3\n");
        assert!(RunConfig::resolve(Overrides { config: Some(cfg), ..Default::default() }).is_err());
    }

    #[test]
    fn synthetic_dataset_section() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(
            dir.path(),
            "s.toml",
            "[[dataset]]\nsynthetic = { n = 500, d = 2, contamination = 0.05, drift = true, seed = 3 }\n",
        );
        let rc = RunConfig::resolve(Overrides { config: Some(cfg), seeds: vec![5], ..Default::default() }).unwrap();
        assert!(matches!(&rc.datasets[0], DatasetSource::Synthetic { config, .. } if config.drift));
        assert_eq!(rc.seeds, vec![5]);
        assert_eq!(rc.cells().len(), 14);
    }
}
