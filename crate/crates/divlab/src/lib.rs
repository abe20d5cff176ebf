//! Command-line experiments and the acceptance suite built on `divlab-core`.

pub mod acceptance;
pub mod cli;
pub mod format;
pub mod report;
