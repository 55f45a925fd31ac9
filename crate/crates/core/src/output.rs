//! On-disk artifact formats.
//!
//! Three artifacts per run: `psd.csv` (log-binned spectrum vs the analytic
//! curve), `summary.json` (ledger and event statistics), `events.csv` (one
//! row per damping event). Floats are written with Rust's shortest
//! round-trip formatting, so read-back is bit-exact; every writer digests
//! its own byte stream so manifests can record checksums without re-reading.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::DissipationEvent;
use crate::stats::{CountingStats, GapStats, MarkStats, RunLedger};

/// `Write` adapter that folds every byte into a SHA-256 digest on the way
/// through.
pub struct DigestWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> DigestWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, hasher: Sha256::new() }
    }

    /// Finish and return the hex digest of everything written.
    pub fn finish(self) -> String {
        hex_string(&self.hasher.finalize())
    }
}

impl<W: Write> Write for DigestWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// One row of the PSD table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdRow {
    /// Angular frequency in radians per period.
    pub omega: f64,
    /// Estimated spectral density.
    pub s_est: f64,
    /// Analytic reference at the same frequency.
    pub s_analytic: f64,
    /// Segments averaged into the estimate (same for every row of a run).
    pub n_segments: usize,
}

pub const PSD_HEADER: &str = "omega,s_est,s_analytic,n_segments";
pub const EVENTS_HEADER: &str = "k,mark";

/// Write the PSD table; returns the SHA-256 of the file contents.
pub fn write_psd_file(path: &Path, rows: &[PsdRow]) -> Result<String> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = DigestWriter::new(BufWriter::new(file));
    let write = |out: &mut DigestWriter<BufWriter<File>>| -> std::io::Result<()> {
        writeln!(out, "{PSD_HEADER}")?;
        for r in rows {
            writeln!(out, "{},{},{},{}", r.omega, r.s_est, r.s_analytic, r.n_segments)?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))?;
    Ok(out.finish())
}

/// Read a PSD table back, bit-exact.
pub fn read_psd_file(path: &Path) -> Result<Vec<PsdRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| malformed(path, 1, "empty file"))?
        .1
        .map_err(|e| Error::io(path, e))?;
    if header != PSD_HEADER {
        return Err(malformed(path, 1, format!("expected header `{PSD_HEADER}`, got `{header}`")));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(malformed(path, lineno, format!("expected 4 fields, got {}", fields.len())));
        }
        rows.push(PsdRow {
            omega: parse_f64(path, lineno, "omega", fields[0])?,
            s_est: parse_f64(path, lineno, "s_est", fields[1])?,
            s_analytic: parse_f64(path, lineno, "s_analytic", fields[2])?,
            n_segments: fields[3]
                .parse()
                .map_err(|_| malformed(path, lineno, format!("bad n_segments `{}`", fields[3])))?,
        });
    }
    Ok(rows)
}

/// Streaming writer for `events.csv`; events go straight to disk, so the
/// event log never has to fit in memory.
pub struct EventsFileWriter {
    path: PathBuf,
    out: DigestWriter<BufWriter<File>>,
    count: u64,
}

impl EventsFileWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = DigestWriter::new(BufWriter::new(file));
        writeln!(out, "{EVENTS_HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), out, count: 0 })
    }

    pub fn push(&mut self, period: u64, mark: f64) -> Result<()> {
        self.count += 1;
        writeln!(self.out, "{period},{mark}").map_err(|e| Error::io(&self.path, e))
    }

    /// Flush and return `(events written, sha256)`.
    pub fn finish(mut self) -> Result<(u64, String)> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok((self.count, self.out.finish()))
    }
}

/// Read an event log back, bit-exact.
pub fn read_events_file(path: &Path) -> Result<Vec<DissipationEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| malformed(path, 1, "empty file"))?
        .1
        .map_err(|e| Error::io(path, e))?;
    if header != EVENTS_HEADER {
        return Err(malformed(path, 1, format!("expected header `{EVENTS_HEADER}`, got `{header}`")));
    }
    let mut events = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (k, mark) = line
            .split_once(',')
            .ok_or_else(|| malformed(path, lineno, "expected 2 fields"))?;
        events.push(DissipationEvent {
            period: k
                .parse()
                .map_err(|_| malformed(path, lineno, format!("bad period `{k}`")))?,
            mark: parse_f64(path, lineno, "mark", mark)?,
        });
    }
    Ok(events)
}

fn parse_f64(path: &Path, line: usize, field: &str, text: &str) -> Result<f64> {
    text.parse().map_err(|_| malformed(path, line, format!("bad {field} `{text}`")))
}

fn malformed(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Malformed { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Everything `summary.json` holds. Statistics that need events a run did
/// not produce are `None` rather than errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: String,
    pub periods: u64,
    pub burn_in: u64,
    /// Seed of the draw stream; `None` for the deterministic analog.
    pub seed: Option<u64>,
    pub event_count: u64,
    /// Events per period.
    pub event_rate: f64,
    pub mean_dissipated_per_period: f64,
    pub ledger: RunLedger,
    pub ledger_relative_defect: f64,
    /// Time-averaged stored energy (clock model only).
    pub mean_energy: Option<f64>,
    /// Stationary prediction `delta / (p w)` (clock model only).
    pub analytic_mean_energy: Option<f64>,
    pub gaps: Option<GapStats>,
    pub marks: Option<MarkStats>,
    pub gap_mark_correlation: Option<f64>,
    /// One entry per counting-window length that fit the run.
    pub counting: Vec<CountingStats>,
}

/// Serialize any document as pretty JSON; returns the file's SHA-256.
pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<String> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = DigestWriter::new(BufWriter::new(file));
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| malformed(path, 0, format!("serialization failed: {e}")))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(out.finish())
}

/// Read any JSON document written by [`write_json_file`].
pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    BufReader::new(file).read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.line(), e.to_string()))
}

pub fn write_summary_file(path: &Path, summary: &Summary) -> Result<String> {
    write_json_file(path, summary)
}

pub fn read_summary_file(path: &Path) -> Result<Summary> {
    read_json_file(path)
}
