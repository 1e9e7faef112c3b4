//! Experiment runner for the `hyperslice` verification suites: TOML
//! configuration, suite execution and JSON/CSV/text reports.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{ConfigError, ExperimentConfig};
pub use report::{CheckRecord, ConvergenceRecord, Format, Relation, SuiteReport};
pub use suites::{run_suite, Suite, CHECKS};
