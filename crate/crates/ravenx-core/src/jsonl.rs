//! JSONL dataset serialization.
//!
//! One puzzle per line, fixed key order, deterministic bytes for equal
//! inputs. The schema is documented in `schemas/puzzle.schema.json` and in
//! the guide; PMF entries are `[value, prob]` pairs and inherit the
//! puzzle-level `range_m`, so every PMF in a line shares one range by
//! construction.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pmf::{PmfError, SparsePmf};
use crate::puzzle::{Panel, Puzzle, PuzzleError, TRUE_ATTRS};
use crate::rules::RuleKind;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invariant violation in field {field}: {source}")]
    Pmf { field: String, source: PmfError },
    #[error("invariant violation: {0}")]
    Puzzle(#[from] PuzzleError),
    #[error("line {line}: {source}")]
    AtLine { line: usize, source: Box<DatasetError> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Wire form of a puzzle line. Field order here is the key order on disk.
#[derive(Debug, Serialize, Deserialize)]
struct RawPuzzle {
    grid_cols: u32,
    range_m: u32,
    seed: u64,
    n_confounders: u32,
    rules: Vec<RuleKind>,
    answer_index: u8,
    context: Vec<RawPanel>,
    candidates: Vec<RawPanel>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPanel {
    true_attrs: Vec<Vec<(u32, f64)>>,
    confounders: Vec<Vec<(u32, f64)>>,
}

fn panel_to_raw(panel: &Panel) -> RawPanel {
    RawPanel {
        true_attrs: panel.true_attrs().iter().map(|p| p.entries().to_vec()).collect(),
        confounders: panel.confounders().iter().map(|p| p.entries().to_vec()).collect(),
    }
}

fn panel_from_raw(raw: RawPanel, range_m: u32, field: &str) -> Result<Panel, DatasetError> {
    let build = |entries: Vec<(u32, f64)>, name: String| {
        SparsePmf::from_entries(entries, range_m)
            .map_err(|source| DatasetError::Pmf { field: name, source })
    };
    let true_attrs = raw
        .true_attrs
        .into_iter()
        .enumerate()
        .map(|(i, e)| build(e, format!("{field}.true_attrs[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let confounders = raw
        .confounders
        .into_iter()
        .enumerate()
        .map(|(i, e)| build(e, format!("{field}.confounders[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Panel::new(true_attrs, confounders)?)
}

/// Serialize a puzzle to a single JSON line (no trailing newline).
pub fn serialize_puzzle(p: &Puzzle) -> String {
    let raw = RawPuzzle {
        grid_cols: p.grid_cols(),
        range_m: p.range_m(),
        seed: p.seed(),
        n_confounders: p.n_confounders(),
        rules: p.rules().to_vec(),
        answer_index: p.answer_index(),
        context: p.context().iter().map(panel_to_raw).collect(),
        candidates: p.candidates().iter().map(panel_to_raw).collect(),
    };
    serde_json::to_string(&raw).expect("puzzle serialization cannot fail")
}

/// Parse one JSON line back into a puzzle, revalidating every invariant.
pub fn deserialize_puzzle(line: &str) -> Result<Puzzle, DatasetError> {
    let raw: RawPuzzle = serde_json::from_str(line)?;
    let range_m = raw.range_m;
    let rules: [RuleKind; TRUE_ATTRS] = raw
        .rules
        .try_into()
        .map_err(|v: Vec<RuleKind>| DatasetError::Puzzle(PuzzleError::BadAttrCount(v.len())))?;
    let context = raw
        .context
        .into_iter()
        .enumerate()
        .map(|(i, p)| panel_from_raw(p, range_m, &format!("context[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let candidates = raw
        .candidates
        .into_iter()
        .enumerate()
        .map(|(i, p)| panel_from_raw(p, range_m, &format!("candidates[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Puzzle::new(
        raw.grid_cols,
        range_m,
        raw.seed,
        raw.n_confounders,
        rules,
        raw.answer_index,
        context,
        candidates,
    )?)
}

/// Write puzzles as JSONL.
pub fn write_puzzles<W: Write>(mut w: W, puzzles: &[Puzzle]) -> Result<(), DatasetError> {
    for p in puzzles {
        w.write_all(serialize_puzzle(p).as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a JSONL dataset, skipping blank lines. Errors carry the 1-based
/// line number.
pub fn read_puzzles<R: BufRead>(r: R) -> Result<Vec<Puzzle>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p = deserialize_puzzle(&line)
            .map_err(|e| DatasetError::AtLine { line: i + 1, source: Box::new(e) })?;
        out.push(p);
    }
    Ok(out)
}
