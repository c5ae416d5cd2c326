//! Experiment harness for tensor-ring completion: binary tensor files,
//! synthetic instances, single completions, sweeps, reshaped runs,
//! benchmarks and CSV reports.

pub mod bench;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;
pub mod reshape;
pub mod sweep;

pub use error::{Error, Result};
