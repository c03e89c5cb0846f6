//! Seeded experiments: configuration, runs, sweeps over population size and
//! their tabular output.

mod config;
mod output;
mod runner;

pub use config::{ExperimentConfig, OutputConfig};
pub use output::{write_jsonl, write_records_csv, write_sweep_csv};
pub use runner::{run_experiment, summarize, sweep, ExperimentRun, SweepRow};
