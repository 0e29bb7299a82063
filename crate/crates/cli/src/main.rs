use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use odstream_cli::config::{FALLBACK_SEED, SEED_ENV};
use odstream_cli::{cmd_gen, cmd_list, cmd_report, cmd_run, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "odstream", version, about = "Streaming outlier detection experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run the dataset x detector x scenario x seed grid and write a report.
    Run(RunArgs),
    /// Write a synthetic labeled stream as CSV.
    Gen {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0.05)]
        contamination: f64,
        #[arg(long)]
        drift: bool,
        #[arg(long, env = SEED_ENV, default_value_t = FALLBACK_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List detectors with their config keys and defaults.
    List,
    /// Print a report as a table grouped by dataset and scenario.
    Report { path: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV dataset(s); replaces datasets from the config file.
    #[arg(long, value_delimiter = ',')]
    data: Vec<PathBuf>,
    /// Label column (default: `label`).
    #[arg(long)]
    label_col: Option<String>,
    /// Label mapping such as `No=0,Yes=1`.
    #[arg(long)]
    label_map: Option<String>,
    /// Columns to ignore.
    #[arg(long, value_delimiter = ',')]
    drop: Vec<String>,
    /// Comma-separated detector kinds (default: all seven).
    #[arg(long)]
    detectors: Option<String>,
    /// Comma-separated scenarios: 1/offline, 2/incremental.
    #[arg(long)]
    scenarios: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// One or more seeds; defaults to $ODSTREAM_SEED, then 42.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// random, stratified or chronological.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    no_standardize: bool,
    /// Scenario 2: learn each test record after scoring it.
    #[arg(long)]
    update_on_test: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or jsonl (default: from the output extension).
    #[arg(long)]
    format: Option<String>,
    /// Parallel grid cells (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Detector setting `key=value`, e.g. `lof.k=5`; repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
}

impl From<RunArgs> for Overrides {
    fn from(a: RunArgs) -> Self {
        Overrides {
            config: a.config,
            data: a.data,
            label_col: a.label_col,
            label_map: a.label_map,
            drop: a.drop,
            detectors: a.detectors,
            scenarios: a.scenarios,
            window: a.window,
            stride: a.stride,
            seeds: a.seed,
            train_fraction: a.train_fraction,
            split: a.split,
            standardize: a.no_standardize.then_some(false),
            update_on_test: a.update_on_test.then_some(true),
            out: a.out,
            format: a.format,
            jobs: a.jobs,
            set: a.set,
        }
    }
}

fn run(cli: Cli) -> odstream::Result<ExitCode> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Run(args) => {
            let cfg = RunConfig::resolve(args.into())?;
            let summary = cmd_run(&cfg, &mut stdout)?;
            for (cell, err) in &summary.failures {
                eprintln!("error: {cell}: {err}");
            }
            Ok(ExitCode::from(summary.exit_code() as u8))
        }
        Command::Gen { n, d, contamination, drift, seed, out } => {
            cmd_gen(n, d, contamination, drift, seed, &out, &mut stdout)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::List => {
            cmd_list(&mut stdout)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { path } => {
            cmd_report(&path, &mut stdout)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
