//! Command-line experiments for the `irs-sop` optimizer.
//!
//! Every command writes one RFC 4180 CSV table and an adjacent `.meta` file
//! holding the resolved configuration (in config-file syntax) and the
//! library version. Tables are byte-identical across reruns with the same
//! configuration and seed, whatever the thread count; wall-clock timings go
//! to `.meta` only.

// NaN must fail validation guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sdpfile;

pub use config::{Axis, ExperimentSpec, Scheme};
pub use error::CliError;
