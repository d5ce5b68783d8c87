//! Verification suites and reports behind the `geokow` binary.

pub mod config;
pub mod report;
pub mod suites;
