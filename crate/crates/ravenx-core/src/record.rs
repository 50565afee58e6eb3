//! One model interaction with a puzzle, as journaled by the eval harness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::TRUE_ATTRS;

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("parse_failed records must carry parsed_answer 0, got {0}")]
    FailedWithAnswer(u8),
    #[error("parsed_answer {0} out of range [0, 7]")]
    AnswerOutOfRange(u8),
}

/// A single prompt/response exchange plus its grading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub puzzle_id: u64,
    pub prompt_text: String,
    pub raw_response: String,
    /// Retrieved answer index; 0 when retrieval failed (the default panel).
    pub parsed_answer: u8,
    pub parse_failed: bool,
    /// Provider-reported completion tokens; 0 when the provider omits usage.
    pub output_tokens: u64,
    /// Whether the chosen candidate matches the answer on each true attribute.
    pub per_attribute_correct: [bool; TRUE_ATTRS],
    pub task_correct: bool,
}

impl EvalRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.parse_failed && self.parsed_answer != 0 {
            return Err(RecordError::FailedWithAnswer(self.parsed_answer));
        }
        if self.parsed_answer > 7 {
            return Err(RecordError::AnswerOutOfRange(self.parsed_answer));
        }
        Ok(())
    }
}
