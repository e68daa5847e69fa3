//! File formats, parallel drivers and the `msfnet` command line for
//! `msfnet-core`.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod netspec;
pub mod output;
pub mod parallel;
pub mod report;
