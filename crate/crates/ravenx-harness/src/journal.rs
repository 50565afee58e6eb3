//! Append-only JSONL journal of eval records, keyed by puzzle id.
//!
//! A run can be interrupted at any point; reloading the journal and skipping
//! the ids already present reproduces the records an uninterrupted run would
//! have produced.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use ravenx_core::record::{EvalRecord, RecordError};

#[derive(Debug, Error)]
pub enum JournalError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("journal line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("journal line {line}: {source}")]
    Invalid { line: usize, source: RecordError },
}

/// Load all records from a journal file; a missing file is an empty journal.
pub fn load_journal(path: &Path) -> Result<Vec<EvalRecord>, JournalError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(&line)
            .map_err(|source| JournalError::Parse { line: i + 1, source })?;
        record
            .validate()
            .map_err(|source| JournalError::Invalid { line: i + 1, source })?;
        out.push(record);
    }
    Ok(out)
}

/// Single-writer append handle; every record is flushed on write so an
/// interrupted run loses at most the in-flight request.
pub struct JournalWriter {
    inner: BufWriter<File>,
}

impl JournalWriter {
    pub fn open(path: &Path) -> Result<Self, JournalError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(JournalWriter { inner: BufWriter::new(file) })
    }

    pub fn append(&mut self, record: &EvalRecord) -> Result<(), JournalError> {
        let line = serde_json::to_string(record).expect("record serialization cannot fail");
        self.inner.write_all(line.as_bytes())?;
        self.inner.write_all(b"\n")?;
        self.inner.flush()?;
        Ok(())
    }
}
