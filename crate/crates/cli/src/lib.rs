//! Experiment driver for the two-layer sphere model: config loading,
//! parallel ensemble execution and the CSV/JSON artifacts behind each
//! subcommand of the `baroclinic` binary.

// Validation guards are written as `!(x > 0)` on purpose: the negated
// form rejects NaN, the suggested `x <= 0` silently accepts it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
