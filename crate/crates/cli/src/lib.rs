//! Command-line front end for `qentropy`: argument parsing, CSV ingestion,
//! JSON/TSV emission and the `verify` invariant battery.
//!
//! Exit codes are `0` on success, `1` when a computation fails (no
//! convergence, violated invariant) and `2` for usage or input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod verify;

pub use commands::{run, Outcome};
pub use config::{parse_args, RunConfig};
pub use error::CliError;
