//! Configuration, run orchestration, experiment drivers and static plots for
//! the `hdch` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
mod error;
pub mod plot;
pub mod verify;

pub use error::{CliError, CliResult};
