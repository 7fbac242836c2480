//! Experiment driver for the `toeplitz-wells` library.
//!
//! Seven subcommands, one per experiment pipeline, all sharing the same
//! shape: a JSON config is parsed and validated against the experiment
//! ([`config`]), the pipeline runs its solves and writes CSV tables plus a
//! deterministic `report.json` ([`runner`], [`report`]), and a one-screen
//! verdict summary goes to stdout. Exit codes: 0 when every verdict passed,
//! 1 when any failed, 2 on configuration or runtime errors.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
