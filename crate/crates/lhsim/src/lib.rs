//! File formats, sweeps, comparisons and the command-line front end for
//! `lhsim-core`.
//!
//! Everything here is plumbing around the core simulation: loading scenario
//! and grid files, fanning runs across worker threads, writing CSV/JSON and
//! plot data atomically, and the desk oracles behind `lhsim oracle`.

pub mod cli;
pub mod compare;
pub mod error;
pub mod io;
pub mod metadata;
pub mod oracle;
pub mod sweep;

pub use error::CliError;
