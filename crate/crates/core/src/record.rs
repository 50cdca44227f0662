//! Transition records and the JSON-Lines trajectory dump.
//!
//! A dump is one header object followed by one [`StepRecord`] per line:
//!
//! ```text
//! {"format":"robogym-trajectory","version":"0.1.0","env":"cartpole-balance",...}
//! {"t":0.02,"obs":[...],"act":[0.0],"rew":1.0,"done":false}
//! ```
//!
//! Reals are written in shortest round-trip form, so re-reading a dump yields
//! bit-identical values. Episodes follow each other without separators; a
//! record with `done: true` ends an episode and the next record belongs to a
//! fresh reset.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::EngineId;

pub const DUMP_FORMAT: &str = "robogym-trajectory";

/// One environment transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Simulated time after the step, seconds since the episode reset.
    pub t: f64,
    #[serde(rename = "obs")]
    pub observation: Vec<f64>,
    #[serde(rename = "act")]
    pub action: Vec<f64>,
    #[serde(rename = "rew")]
    pub reward: f64,
    pub done: bool,
}

impl StepRecord {
    /// The canonical single-line JSON encoding.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("step records always serialize")
    }
}

/// Provenance written as the first line of every dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub format: String,
    pub version: String,
    pub env: String,
    pub engine: EngineId,
    pub seed: u64,
    pub physics_dt: f64,
    pub agent_period: f64,
    /// Initial-state noise disabled (deterministic initial state).
    #[serde(default)]
    pub exact_init: bool,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dump is empty (missing header line)")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A fully read dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub header: DumpHeader,
    pub records: Vec<StepRecord>,
}

pub struct DumpWriter<W: Write> {
    out: W,
}

impl<W: Write> DumpWriter<W> {
    pub fn new(mut out: W, header: &DumpHeader) -> io::Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(DumpWriter { out })
    }

    pub fn write(&mut self, record: &StepRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Reads a dump. Every line must be complete JSON; a truncated final line is
/// reported with its 1-based line number.
pub fn read_dump(input: impl BufRead) -> Result<Dump, DumpError> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(DumpError::Empty)?;
    let header: DumpHeader = serde_json::from_str(&first?).map_err(|e| DumpError::Parse {
        line: 1,
        message: format!("invalid header: {e}"),
    })?;
    if header.format != DUMP_FORMAT {
        return Err(DumpError::Parse {
            line: 1,
            message: format!("unknown dump format {:?}", header.format),
        });
    }
    let mut records = Vec::new();
    for (index, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| DumpError::Parse {
            line: index + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(Dump { header, records })
}

/// Index of the first record whose canonical encoding differs, or of the
/// first record present in only one stream.
pub fn first_divergence(a: &[StepRecord], b: &[StepRecord]) -> Option<usize> {
    let common = a.len().min(b.len());
    (0..common)
        .find(|&i| a[i].to_json_line() != b[i].to_json_line())
        .or_else(|| (a.len() != b.len()).then_some(common))
}
