//! Evaluation harness: renders prompts for ravenx puzzles, queries any
//! chat-completion-style HTTP endpoint, retrieves the declared answer, and
//! journals every exchange so interrupted runs resume where they stopped.

pub mod client;
pub mod eval;
pub mod journal;
pub mod prompt;

pub use client::{ChatClient, ClientError, ProviderConfig, RetryPolicy};
pub use eval::{dry_run, grade_response, run_eval, EvalError};
pub use journal::{load_journal, JournalWriter};
pub use prompt::{parse_answer, render_prompt, PromptStyle};
