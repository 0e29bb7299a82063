use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use odstream::eval::{read_report, run_cell, write_report, ReportRow, ScenarioKind};
use odstream::ingest::{gen_synthetic, load_csv, write_csv, Dataset};
use odstream::{DetectorConfig, DetectorKind, Error, Result};

use crate::config::{DatasetSource, RunConfig};

/// Loads one dataset; the error is a message naming the dataset (and file).
fn load(source: &DatasetSource) -> std::result::Result<Dataset, String> {
    match source {
        DatasetSource::Csv { name, path, options } => {
            let mut ds = load_csv(path, options).map_err(|e| format!("{name} ({}): {e}", path.display()))?;
            ds.name = name.clone();
            if ds.load_stats.dropped_rows > 0 {
                log::warn!("{name}: dropped {} rows with unparseable values", ds.load_stats.dropped_rows);
            }
            for c in &ds.load_stats.categorical {
                log::info!("{name}: column `{}` encoded as {} categories", c.name, c.levels.len());
            }
            Ok(ds)
        }
        DatasetSource::Synthetic { name, config } => {
            let mut ds = config.generate().map_err(|e| format!("{name}: {e}"))?;
            ds.name = name.clone();
            Ok(ds)
        }
    }
}

fn fmt_auc(auc: Option<f64>) -> String {
    auc.map_or_else(|| "undefined".to_string(), |a| format!("{a:.6}"))
}

/// Outcome of a grid run.
#[derive(Debug)]
pub struct RunSummary {
    pub rows: Vec<ReportRow>,
    /// `(cell description, error)` for each failed cell.
    pub failures: Vec<(String, String)>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failures.is_empty())
    }
}

/// Runs the whole grid, prints one line per cell to `stdout` in grid order and
/// writes the report. Failed cells are listed and leave the exit code nonzero;
/// the remaining rows are still written.
pub fn cmd_run(cfg: &RunConfig, stdout: &mut impl Write) -> Result<RunSummary> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let datasets: Vec<std::result::Result<Dataset, String>> = cfg.datasets.iter().map(load).collect();
    let cells = cfg.cells();
    log::info!("running {} cells on {} threads", cells.len(), pool.current_num_threads());

    let results: Vec<Result<ReportRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(d, spec)| {
                let ds = datasets[*d].as_ref().map_err(|e| Error::DatasetLoad(e.clone()))?;
                let out = run_cell(ds, spec)?;
                log::info!("{} {} {} seed {} done", spec.dataset, spec.detector, spec.scenario, spec.seed);
                Ok(out.row)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((_, spec), result) in cells.iter().zip(results) {
        let cell = format!("{} {} {} seed={}", spec.dataset, spec.detector, spec.scenario, spec.seed);
        match result {
            Ok(row) => {
                writeln!(stdout, "{cell} auc={} n_train={} n_test={}", fmt_auc(row.auc), row.n_train, row.n_test)?;
                rows.push(row);
            }
            Err(e) => {
                writeln!(stdout, "{cell} FAILED: {e}")?;
                failures.push((cell, e.to_string()));
            }
        }
    }
    if !rows.is_empty() {
        write_report(&rows, &cfg.out, cfg.format)?;
        log::info!("wrote {} rows to {}", rows.len(), cfg.out.display());
    }
    Ok(RunSummary { rows, failures })
}

/// Writes a synthetic labeled stream and prints a one-line summary.
pub fn cmd_gen(
    n: usize,
    d: usize,
    contamination: f64,
    drift: bool,
    seed: u64,
    out: &Path,
    stdout: &mut impl Write,
) -> Result<()> {
    let ds = gen_synthetic(n, d, contamination, drift, seed)?;
    write_csv(&ds, out)?;
    let pos = ds.positives();
    writeln!(
        stdout,
        "wrote {} rows ({} outliers, {} inliers, d={d}, drift={drift}) to {}",
        ds.len(),
        pos,
        ds.len() - pos,
        out.display()
    )?;
    Ok(())
}

/// Prints every detector with its config keys and defaults.
pub fn cmd_list(stdout: &mut impl Write) -> Result<()> {
    let defaults = DetectorConfig::default();
    for kind in DetectorKind::ALL {
        let keys: Vec<String> =
            kind.config_keys().iter().map(|k| format!("{k}={}", defaults.get(k).unwrap_or_default())).collect();
        writeln!(stdout, "{:<12} {}", kind.name(), keys.join(" "))?;
    }
    Ok(())
}

/// Aligned table: one line per (dataset, scenario), one column per detector,
/// each cell the mean AUC over seeds.
pub fn cmd_report(path: &Path, stdout: &mut impl Write) -> Result<()> {
    let rows = read_report(path)?;
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut detectors: Vec<DetectorKind> = rows.iter().map(|r| r.detector).collect();
    detectors.sort();
    detectors.dedup();

    // Per cell: (sum of defined AUCs, defined count, undefined count).
    type Tally = (f64, usize, usize);
    let mut cells: BTreeMap<(String, ScenarioKind), BTreeMap<DetectorKind, Tally>> = BTreeMap::new();
    for r in &rows {
        let e = cells.entry((r.dataset.clone(), r.scenario)).or_default().entry(r.detector).or_default();
        match r.auc {
            Some(a) => {
                e.0 += a;
                e.1 += 1;
            }
            None => e.2 += 1,
        }
    }

    let mut table = vec![{
        let mut h = vec!["dataset".to_string(), "scenario".to_string()];
        h.extend(detectors.iter().map(|d| d.name().to_string()));
        h
    }];
    for ((dataset, scenario), by_det) in &cells {
        let mut line = vec![dataset.clone(), format!("{} ({})", scenario.number(), scenario)];
        for d in &detectors {
            line.push(match by_det.get(d) {
                Some(&(sum, n, _)) if n > 0 => format!("{:.3}", sum / n as f64),
                Some(_) => "undefined".to_string(),
                None => "-".to_string(),
            });
        }
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len()).map(|c| table.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
    for line in &table {
        let cols: Vec<String> = line.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        writeln!(stdout, "{}", cols.join("  ").trim_end())?;
    }
    Ok(())
}
