//! Scenario files, CSV and matrix formats, verification suites and the
//! `phs` command line on top of `phs-core`.

pub mod cli;
pub mod config;
pub mod matrix_io;
pub mod scenario;
pub mod suites;
pub mod table;

pub use phs_core as core;
