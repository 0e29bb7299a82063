//! Library side of the `odstream` binary: config resolution and the
//! `run`, `gen`, `list` and `report` commands.

pub mod commands;
pub mod config;

pub use commands::{cmd_gen, cmd_list, cmd_report, cmd_run, RunSummary};
pub use config::{DatasetSource, Overrides, RunConfig};
