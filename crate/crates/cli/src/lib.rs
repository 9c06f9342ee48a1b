//! Manifest loading, report rendering and the `bibo` subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod manifest;
pub mod report;
