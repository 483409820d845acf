//! Experiment harness around `isoflow-core`: built-in fixtures, flow
//! runs with CSV/plot output, flow comparison, the scaling check, the
//! counterexample verifications, and the seeded self-test suites.

pub mod error;
pub mod fixtures;
pub mod matfile;
pub mod output;
pub mod runner;
pub mod selftest;

pub use error::{CliError, Result};
