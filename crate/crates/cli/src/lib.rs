//! Experiment plumbing for the `autopu` binary: CSV ingestion, experiment
//! specs, nested-CV runs and comparison reports.

pub mod error;
pub mod ingest;
pub mod report;
pub mod run;
pub mod spec;

pub use error::CliError;
pub use ingest::{ingest_csv, read_dataset, report, IngestReport, MissingPolicy};
pub use report::{cmd_compare, cmd_freq, load_results, read_comparison_csv, space_size};
pub use run::{cmd_run, RunOptions, RunOutcome};
pub use spec::ExperimentSpec;
