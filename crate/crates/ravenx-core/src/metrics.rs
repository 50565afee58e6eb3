//! Run metrics and report emission.
//!
//! Task accuracy is the fraction of puzzles whose chosen candidate is the
//! ground-truth answer. Arithmetic accuracy is measured per attribute, over
//! the attributes governed by an arithmetic rule: the chosen candidate's
//! value must equal the answer's value for that attribute, so errors on
//! non-arithmetic attributes do not count against it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::{Puzzle, TRUE_ATTRS};
use crate::record::EvalRecord;
use crate::solver::Prediction;
use crate::uncertainty::snr_db;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no records to aggregate")]
    EmptyInput,
    #[error("record/puzzle id mismatch: {0}")]
    IdMismatch(String),
}

/// The minimal view of one graded prediction that every metric consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub puzzle_id: u64,
    pub predicted_index: u8,
    pub answer_index: u8,
    pub output_tokens: u64,
    pub solve_time_ms: f64,
}

impl PredictionRecord {
    /// Grade an eval-harness record against its puzzle.
    pub fn from_eval(record: &EvalRecord, puzzle: &Puzzle) -> Self {
        PredictionRecord {
            puzzle_id: record.puzzle_id,
            predicted_index: record.parsed_answer,
            answer_index: puzzle.answer_index(),
            output_tokens: record.output_tokens,
            solve_time_ms: 0.0,
        }
    }
}

impl From<&Prediction> for PredictionRecord {
    fn from(p: &Prediction) -> Self {
        PredictionRecord {
            puzzle_id: p.puzzle_id,
            predicted_index: p.predicted_index,
            answer_index: p.answer_index,
            output_tokens: 0,
            solve_time_ms: p.solve_time_ms,
        }
    }
}

/// Fraction of records whose prediction equals the ground truth.
pub fn task_accuracy(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let correct = records.iter().filter(|r| r.predicted_index == r.answer_index).count();
    Ok(correct as f64 / records.len() as f64)
}

fn pair_with_puzzles<'a>(
    records: &'a [PredictionRecord],
    puzzles: &'a [Puzzle],
) -> Result<Vec<(&'a PredictionRecord, &'a Puzzle)>, MetricsError> {
    if records.len() != puzzles.len() {
        return Err(MetricsError::IdMismatch(format!(
            "{} records against {} puzzles",
            records.len(),
            puzzles.len()
        )));
    }
    records
        .iter()
        .map(|r| {
            puzzles
                .iter()
                .find(|p| p.seed() == r.puzzle_id)
                .map(|p| (r, p))
                .ok_or_else(|| MetricsError::IdMismatch(format!("no puzzle with id {}", r.puzzle_id)))
        })
        .collect()
}

/// Accuracy over (puzzle, attribute) pairs governed by an arithmetic rule;
/// `None` when the dataset contains no arithmetic attributes.
pub fn arithmetic_accuracy(
    records: &[PredictionRecord],
    puzzles: &[Puzzle],
) -> Result<Option<f64>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut total = 0u64;
    let mut correct = 0u64;
    for (record, puzzle) in pair_with_puzzles(records, puzzles)? {
        let chosen = &puzzle.candidates()[record.predicted_index as usize];
        let answer = &puzzle.candidates()[puzzle.answer_index() as usize];
        for attr in 0..TRUE_ATTRS {
            if puzzle.rules()[attr].is_arithmetic() {
                total += 1;
                if chosen.true_attrs()[attr].mode() == answer.true_attrs()[attr].mode() {
                    correct += 1;
                }
            }
        }
    }
    Ok((total > 0).then(|| correct as f64 / total as f64))
}

/// Aggregated metrics plus a configuration echo, mirroring the layout of
/// the evaluation tables (Task / Arith. / Tok. per setting).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task_accuracy: f64,
    /// Absent when no attribute is governed by an arithmetic rule.
    pub arithmetic_accuracy: Option<f64>,
    pub mean_output_tokens: f64,
    pub mean_solve_time_ms: f64,
    pub grid_cols: u32,
    pub range_m: u32,
    pub n_confounders: u32,
    /// "degenerate" for clean value distributions, "smoothed" otherwise.
    pub smoothing: String,
    /// `None` encodes an infinite SNR (no confounders).
    pub snr_db: Option<f64>,
    pub n_puzzles: usize,
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

/// Aggregate records into a [`RunReport`].
pub fn build_report(
    records: &[PredictionRecord],
    puzzles: &[Puzzle],
) -> Result<RunReport, MetricsError> {
    let task = task_accuracy(records)?;
    let arith = arithmetic_accuracy(records, puzzles)?;
    let first = &puzzles[0];
    let smoothed = puzzles
        .iter()
        .any(|p| p.panels().any(|panel| panel.attrs().any(|pmf| !pmf.is_degenerate())));
    let n = records.len() as f64;
    let snr = snr_db(first.n_confounders());
    Ok(RunReport {
        task_accuracy: task,
        arithmetic_accuracy: arith,
        mean_output_tokens: records.iter().map(|r| r.output_tokens as f64).sum::<f64>() / n,
        mean_solve_time_ms: records.iter().map(|r| r.solve_time_ms).sum::<f64>() / n,
        grid_cols: first.grid_cols(),
        range_m: first.range_m(),
        n_confounders: first.n_confounders(),
        smoothing: if smoothed { "smoothed".into() } else { "degenerate".into() },
        snr_db: snr.is_finite().then_some(snr),
        n_puzzles: records.len(),
    })
}

/// Render a report as JSON (full precision) or as a markdown table with
/// accuracies in percent to one decimal place. Byte-identical for equal
/// inputs.
pub fn emit_report(
    records: &[PredictionRecord],
    puzzles: &[Puzzle],
    format: ReportFormat,
) -> Result<String, MetricsError> {
    let report = build_report(records, puzzles)?;
    Ok(match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(&report).expect("report serialization cannot fail")
        }
        ReportFormat::Markdown => render_markdown(&report),
    })
}

fn render_markdown(r: &RunReport) -> String {
    let arith = r
        .arithmetic_accuracy
        .map(|a| format!("{:.1}", a * 100.0))
        .unwrap_or_else(|| "-".into());
    let snr = r.snr_db.map(|s| format!("{s:.2}")).unwrap_or_else(|| "inf".into());
    let mut out = String::new();
    out.push_str(&format!(
        "| Setting | SNR (dB) | Task | Arith. | Tok. | Time (ms) | n |\n\
         |---------|----------|------|--------|------|-----------|---|\n\
         | 3x{} range {} k={} {} | {} | {:.1} | {} | {:.0} | {:.3} | {} |\n",
        r.grid_cols,
        r.range_m,
        r.n_confounders,
        r.smoothing,
        snr,
        r.task_accuracy * 100.0,
        arith,
        r.mean_output_tokens,
        r.mean_solve_time_ms,
        r.n_puzzles,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_3x3;
    use crate::generator::{generate_dataset, GenConfig};
    use crate::rules::{RuleKind, RULE_COUNT};

    fn perfect_records(puzzles: &[Puzzle]) -> Vec<PredictionRecord> {
        puzzles
            .iter()
            .map(|p| PredictionRecord {
                puzzle_id: p.seed(),
                predicted_index: p.answer_index(),
                answer_index: p.answer_index(),
                output_tokens: 0,
                solve_time_ms: 0.5,
            })
            .collect()
    }

    #[test]
    fn accuracies_on_perfect_predictions() {
        let mut weights = [0.0; RULE_COUNT];
        weights[RuleKind::ArithPlus.index()] = 1.0;
        weights[RuleKind::Constant.index()] = 1.0;
        let puzzles: Vec<Puzzle> =
            generate_dataset(&GenConfig::new(3, 10, 20, 3).with_rule_weights(weights))
                .map(|p| p.unwrap())
                .collect();
        let records = perfect_records(&puzzles);
        assert_eq!(task_accuracy(&records).unwrap(), 1.0);
        assert_eq!(arithmetic_accuracy(&records, &puzzles).unwrap(), Some(1.0));
    }

    #[test]
    fn arithmetic_accuracy_ignores_non_arithmetic_errors() {
        // fixture rules: distribute, constant, constant -> no arithmetic
        let p = fixture_3x3();
        let mut records = perfect_records(&[p.clone()]);
        records[0].predicted_index = (records[0].answer_index + 1) % 8;
        assert_eq!(arithmetic_accuracy(&records, &[p]).unwrap(), None);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(task_accuracy(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn id_mismatch_detected() {
        let p = fixture_3x3();
        let mut records = perfect_records(&[p.clone()]);
        records[0].puzzle_id = 999;
        assert!(matches!(
            arithmetic_accuracy(&records, &[p]),
            Err(MetricsError::IdMismatch(_))
        ));
    }

    #[test]
    fn report_is_deterministic_and_echoes_snr() {
        let puzzles: Vec<Puzzle> = generate_dataset(&GenConfig::new(3, 10, 5, 4))
            .map(|p| p.unwrap())
            .collect();
        let records = perfect_records(&puzzles);
        let a = emit_report(&records, &puzzles, ReportFormat::Json).unwrap();
        let b = emit_report(&records, &puzzles, ReportFormat::Json).unwrap();
        assert_eq!(a, b);
        let report = build_report(&records, &puzzles).unwrap();
        assert_eq!(report.snr_db, None); // k = 0: infinite SNR
        assert_eq!(report.n_puzzles, 5);
        let md = emit_report(&records, &puzzles, ReportFormat::Markdown).unwrap();
        assert!(md.contains("| 100.0 |"), "{md}");
    }
}
