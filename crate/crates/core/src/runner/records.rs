//! Per-example run records, persisted as JSONL while the run is in flight.

use crate::parse::ParseStatus;
use crate::schema::LabelSet;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at {path} line {line}: {source}")]
    Malformed {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Everything observed for one eval example, in eval-split order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub example_id: String,
    /// Content hash of the rendered prompt; joins the record to the cache.
    pub prompt_hash: String,
    pub raw_response: String,
    pub parse_status: ParseStatus,
    pub predicted: LabelSet,
    pub gold: LabelSet,
    pub latency_ms: u64,
    pub from_cache: bool,
    pub attempt_count: u32,
    /// Provider-level failure for this slot, if any; such slots carry the
    /// empty-set fallback prediction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    /// The fields that must replay identically from a warm cache; excludes
    /// transport provenance (latency, cache flag, attempts, error text).
    pub fn content_fields(&self) -> (&str, &str, &str, &ParseStatus, &LabelSet, &LabelSet) {
        (
            &self.example_id,
            &self.prompt_hash,
            &self.raw_response,
            &self.parse_status,
            &self.predicted,
            &self.gold,
        )
    }
}

/// Appends records one JSON line at a time, flushing each so a crash or a
/// concurrent reader sees every completed example.
pub struct RecordWriter {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl RecordWriter {
    pub fn create(path: &Path) -> Result<Self, RecordError> {
        let file = File::create(path).map_err(|source| RecordError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(RecordWriter {
            path: path.to_path_buf(),
            writer: BufWriter::new(file),
        })
    }

    pub fn append(&mut self, record: &RunRecord) -> Result<(), RecordError> {
        let line = serde_json::to_string(record).expect("record serializes");
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.write_all(b"\n"))
            .and_then(|_| self.writer.flush())
            .map_err(|source| RecordError::Io {
                path: self.path.clone(),
                source,
            })
    }
}

/// Reads a complete records file; any malformed line is an error because
/// finished artifacts are written through an atomic rename.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, RecordError> {
    let file = File::open(path).map_err(|source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| RecordError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|source| RecordError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(records)
}
