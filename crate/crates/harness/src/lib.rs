//! Randomized verification suites over `qdiv-core` and the `qdiv` CLI
//! plumbing.

pub mod config;
pub mod oracles;
pub mod report;
pub mod suites;

pub use config::{Suite, SuiteConfig, Tolerances};
pub use report::{CheckRecord, RunReport, SuiteReport};
pub use suites::{replay, run, run_suite};
