//! Command-line tool and file formats for the fractional BN-S model.
//!
//! The numerics live in [`fracvol_core`]; this crate adds parameter files,
//! CSV and binary IO, a thread pool driver and the `fracvol` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use fracvol_core as core;
