//! CSV reports. Every file starts with `# trc-csv v<SCHEMA_VERSION> <kind>`,
//! then a header row.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Completion,
    Sweep,
    Bench,
}

impl ReportKind {
    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Completion => "completion",
            ReportKind::Sweep => "sweep",
            ReportKind::Bench => "bench",
        }
    }

    pub fn header_comment(self) -> String {
        format!("# trc-csv v{SCHEMA_VERSION} {}", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRow {
    pub solver: String,
    /// Extents joined by `x`.
    pub shape: String,
    /// Ranks joined by `-`.
    pub ranks: String,
    pub missing_rate: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Empty without ground truth.
    pub rse_all: Option<f64>,
    /// Empty without ground truth or without missing entries.
    pub rse_missing: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub solver: String,
    pub shape: String,
    pub ranks: String,
    /// Sum of square roots of the solver ranks.
    pub ssr: f64,
    pub missing_rate: f64,
    pub lambda: f64,
    pub repeats: usize,
    pub mean_rse_missing: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub std_rse_missing: f64,
    /// Robust to the occasional run that stalls in a poor local minimum.
    pub median_rse_missing: f64,
    pub mean_rse_all: f64,
    pub mean_iterations: f64,
    pub converged_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub solver: String,
    pub order: usize,
    pub extent: usize,
    pub rank: usize,
    pub iterations: usize,
    pub secs_per_iter: f64,
}

pub fn write_rows<W: Write, T: Serialize>(mut out: W, kind: ReportKind, rows: &[T]) -> Result<()> {
    writeln!(out, "{}", kind.header_comment()).map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, kind: ReportKind, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(std::io::BufWriter::new(file), kind, rows)
}

/// Reads a report, checking its version line against `kind`.
pub fn read_csv<T: DeserializeOwned>(path: &Path, kind: ReportKind) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    if first.trim_end() != kind.header_comment() {
        return Err(Error::Usage(format!(
            "{}: expected {:?}, found {:?}",
            path.display(),
            kind.header_comment(),
            first.trim_end()
        )));
    }
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
