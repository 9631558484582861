//! Command-line front end, file formats and parallel drivers for `monoscat-core`.
//!
//! [`cli::run`] is the whole program behind the `monoscat` binary, exposed so that it can be
//! driven in-process. [`drivers`] fans the embarrassingly parallel scans (contour grids,
//! lattice columns, WKB comparisons) out over a thread pool while keeping output order
//! fixed, so results are byte-identical regardless of scheduling.

pub mod cli;
pub mod config;
pub mod drivers;
pub mod format;
