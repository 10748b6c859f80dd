//! Experiment harness: named experiment recipes, replicated runs with CSV and
//! JSON output, and the compatibility table of statistic subsets.

pub mod compat_table;
pub mod config;
pub mod error;
pub mod experiment;
pub mod summary;

pub use compat_table::{compatibility_rows, emit_compatibility_table, CompatRow};
pub use config::{expand_config, ExperimentConfig, ExperimentId, StatisticSet, Truth};
pub use error::CliError;
pub use experiment::{read_records, run_experiment, ReplicationRecord, RunOptions, RunOutput};
pub use summary::{quartiles, summarize, CellSummary, Summary};
