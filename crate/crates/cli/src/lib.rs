//! Command-line driver for the `staticdec-core` verification suites: JSON
//! configuration, suite runners and machine-readable reports.

pub mod config;
pub mod error;
pub mod report;
pub mod suites;

pub use config::{GridConfig, Suite, SuiteConfig, SuiteParams, TodCase};
pub use error::CliError;
pub use report::{Check, SuiteReport};
pub use suites::run_suite;
