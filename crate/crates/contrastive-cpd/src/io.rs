//! Plain-text signal ingestion and report serialization.
//!
//! Input is one sample per line, comma-separated components for vectors,
//! with `#` comment lines and blank lines skipped. Ingestion optionally
//! keeps every `stride`-th sample and z-scores the rest using mean and
//! standard deviation estimated from a leading prefix of the kept samples,
//! so detection never looks ahead of the data that produced its scaling.
//!
//! Reports are single JSON documents tagged with a `schema_version`; traces
//! additionally export as a flat CSV for plotting.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::PathBuf;

use crate::detector::TracePoint;
use crate::simbench::RepOutcome;

/// Version tag written into every report and CSV produced by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Where to read samples from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Stdin,
    Path(PathBuf),
}

/// How to turn a text stream into samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSpec {
    pub source: Source,
    /// Columns forming the sample vector, in order; all columns when absent.
    pub columns: Option<Vec<usize>>,
    /// Keep rows 0, stride, 2*stride, ... of the parsed rows.
    pub stride: usize,
    pub normalize: bool,
    /// Kept samples used to estimate the z-score reference.
    pub prefix_len: usize,
}

impl Default for IngestSpec {
    fn default() -> Self {
        Self {
            source: Source::Stdin,
            columns: None,
            stride: 1,
            normalize: false,
            prefix_len: 50,
        }
    }
}

/// Per-component reference estimated from the calibration prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    /// Sample standard deviation (n - 1 in the denominator).
    pub std: Vec<f64>,
}

/// Result of ingestion: ready-to-stream samples plus the scaling used.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub samples: Vec<Vec<f64>>,
    /// Components per sample; 0 when the input had no data rows.
    pub dim: usize,
    /// Present when normalization was applied.
    pub stats: Option<NormalizationStats>,
}

/// Errors from reading or preprocessing input data.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("read failed: {0}")]
    Read(#[from] std::io::Error),
    #[error("line {line}: cannot parse {token:?} as a number")]
    Parse { line: usize, token: String },
    #[error("line {line}: expected {expected} components, got {got}")]
    Ragged {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: column {column} out of range for {got} components")]
    ColumnOutOfRange {
        line: usize,
        column: usize,
        got: usize,
    },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("normalization prefix must cover at least 2 samples")]
    ShortPrefix,
    #[error("normalization prefix needs {needed} samples but only {available} were kept")]
    InsufficientPrefix { needed: usize, available: usize },
    #[error("component {component} is constant over the calibration prefix (std = 0)")]
    DegenerateReference { component: usize },
}

/// Read and preprocess samples according to `spec`.
pub fn ingest(spec: &IngestSpec) -> Result<Ingested, IngestError> {
    match &spec.source {
        Source::Stdin => ingest_reader(std::io::stdin().lock(), spec),
        Source::Path(path) => {
            let file = File::open(path).map_err(|source| IngestError::Open {
                path: path.clone(),
                source,
            })?;
            ingest_reader(BufReader::new(file), spec)
        }
    }
}

/// [`ingest`] over an arbitrary reader; `spec.source` is ignored.
pub fn ingest_reader<R: Read>(reader: R, spec: &IngestSpec) -> Result<Ingested, IngestError> {
    if spec.stride == 0 {
        return Err(IngestError::ZeroStride);
    }
    if spec.normalize && spec.prefix_len < 2 {
        return Err(IngestError::ShortPrefix);
    }
    let parsed = parse_records(reader, spec.columns.as_deref())?;
    let dim = parsed.first().map_or(0, Vec::len);
    let mut samples: Vec<Vec<f64>> = parsed.into_iter().step_by(spec.stride).collect();
    let stats = if spec.normalize {
        let stats = normalization_stats(&samples, spec.prefix_len)?;
        for sample in &mut samples {
            for ((x, m), s) in sample.iter_mut().zip(&stats.mean).zip(&stats.std) {
                *x = (*x - m) / s;
            }
        }
        Some(stats)
    } else {
        None
    };
    Ok(Ingested { samples, dim, stats })
}

/// Parse data rows, skipping comments and blanks, keeping `columns` of each.
fn parse_records<R: Read>(
    reader: R,
    columns: Option<&[usize]>,
) -> Result<Vec<Vec<f64>>, IngestError> {
    let mut records = Vec::new();
    let mut expected: Option<usize> = None;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let record = match columns {
            None => parse_fields(&fields, lineno)?,
            Some(cols) => {
                let mut picked = Vec::with_capacity(cols.len());
                for &c in cols {
                    let field = fields.get(c).ok_or(IngestError::ColumnOutOfRange {
                        line: lineno,
                        column: c,
                        got: fields.len(),
                    })?;
                    picked.push(parse_field(field, lineno)?);
                }
                picked
            }
        };
        match expected {
            None => expected = Some(record.len()),
            Some(e) if e != record.len() => {
                return Err(IngestError::Ragged {
                    line: lineno,
                    expected: e,
                    got: record.len(),
                })
            }
            Some(_) => {}
        }
        records.push(record);
    }
    Ok(records)
}

fn parse_fields(fields: &[&str], lineno: usize) -> Result<Vec<f64>, IngestError> {
    fields.iter().map(|f| parse_field(f, lineno)).collect()
}

fn parse_field(field: &str, lineno: usize) -> Result<f64, IngestError> {
    field.parse().map_err(|_| IngestError::Parse {
        line: lineno,
        token: field.to_string(),
    })
}

/// Per-component mean and sample standard deviation of the first
/// `prefix_len` samples.
fn normalization_stats(
    samples: &[Vec<f64>],
    prefix_len: usize,
) -> Result<NormalizationStats, IngestError> {
    if samples.len() < prefix_len {
        return Err(IngestError::InsufficientPrefix {
            needed: prefix_len,
            available: samples.len(),
        });
    }
    let prefix = &samples[..prefix_len];
    let dim = prefix[0].len();
    let mut mean = vec![0.0; dim];
    for sample in prefix {
        for (m, x) in mean.iter_mut().zip(sample) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= prefix_len as f64;
    }
    let mut std = vec![0.0; dim];
    for sample in prefix {
        for ((s, x), m) in std.iter_mut().zip(sample).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for (component, s) in std.iter_mut().enumerate() {
        *s = (*s / (prefix_len - 1) as f64).sqrt();
        if *s <= 0.0 {
            return Err(IngestError::DegenerateReference { component });
        }
    }
    Ok(NormalizationStats { mean, std })
}

/// Full record of one detection run, JSON-serializable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Discriminator family label, e.g. `poly:1`.
    pub class: String,
    pub threshold: f64,
    pub warmup: usize,
    pub margin: usize,
    pub window_cap: Option<usize>,
    pub seed: u64,
    pub stride: usize,
    pub normalization: Option<NormalizationStats>,
    pub stopping_time: Option<usize>,
    pub argmax_split: Option<usize>,
    /// Statistic at the stopping time, when an alarm fired.
    pub statistic: Option<f64>,
    pub trace: Vec<TracePoint>,
    pub wall_time_secs: f64,
}

/// Summary of a simulated scenario run, JSON-serializable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub scenario: String,
    pub class: String,
    pub seed: u64,
    /// Auto-calibrated alarm threshold used for every replication.
    pub threshold: f64,
    pub mean_delay: Option<f64>,
    pub std_delay: Option<f64>,
    pub misses: usize,
    pub outcomes: Vec<RepOutcome>,
    pub wall_time_secs: f64,
}

/// Serialize a report as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(report: &T, out: &mut W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    out.write_all(b"\n")
}

/// Parse a report previously written by [`write_json`].
pub fn read_json<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> serde_json::Result<T> {
    serde_json::from_reader(reader)
}

/// Write the statistic trace as plot-ready CSV.
pub fn write_trace_csv<W: Write>(trace: &[TracePoint], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(out, "t,S_t,tau_hat")?;
    for point in trace {
        writeln!(out, "{},{:.6},{}", point.t, point.statistic, point.tau_hat)?;
    }
    Ok(())
}
