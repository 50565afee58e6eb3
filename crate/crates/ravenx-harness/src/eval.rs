//! Discriminative evaluation loop: one request per puzzle, bounded
//! concurrency, a single journal writer, resumable by puzzle id.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use thiserror::Error;

use ravenx_core::puzzle::{Puzzle, TRUE_ATTRS};
use ravenx_core::record::EvalRecord;

use crate::client::{ChatClient, ClientError, ProviderConfig};
use crate::journal::{load_journal, JournalError, JournalWriter};
use crate::prompt::{render_prompt, PromptError, PromptStyle};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("duplicate puzzle id {0} in dataset; journal keys must be unique")]
    DuplicateId(u64),
}

/// Grade a raw model response against its puzzle.
pub fn grade_response(
    puzzle: &Puzzle,
    prompt_text: String,
    raw_response: String,
    output_tokens: u64,
) -> EvalRecord {
    let (parsed_answer, parse_failed) = crate::prompt::parse_answer(&raw_response);
    let chosen = &puzzle.candidates()[parsed_answer as usize];
    let answer = &puzzle.candidates()[puzzle.answer_index() as usize];
    let mut per_attribute_correct = [false; TRUE_ATTRS];
    for (attr, flag) in per_attribute_correct.iter_mut().enumerate() {
        *flag = chosen.true_attrs()[attr].mode() == answer.true_attrs()[attr].mode();
    }
    EvalRecord {
        puzzle_id: puzzle.seed(),
        prompt_text,
        raw_response,
        parsed_answer,
        parse_failed,
        output_tokens,
        per_attribute_correct,
        task_correct: parsed_answer == puzzle.answer_index(),
    }
}

fn check_unique_ids(puzzles: &[Puzzle]) -> Result<(), EvalError> {
    let mut seen = HashSet::with_capacity(puzzles.len());
    for p in puzzles {
        if !seen.insert(p.seed()) {
            return Err(EvalError::DuplicateId(p.seed()));
        }
    }
    Ok(())
}

/// Write every rendered prompt to `dir` (one file per puzzle) without any
/// network traffic. Returns the written paths in dataset order.
pub fn dry_run(
    puzzles: &[Puzzle],
    style: PromptStyle,
    dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    check_unique_ids(puzzles)?;
    std::fs::create_dir_all(dir).map_err(JournalError::from)?;
    let mut paths = Vec::with_capacity(puzzles.len());
    for p in puzzles {
        let prompt = render_prompt(p, style)?;
        let path = dir.join(format!("{}.txt", p.seed()));
        std::fs::write(&path, prompt).map_err(JournalError::from)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Evaluate a dataset against a chat-completion endpoint.
///
/// One request per puzzle, no in-context examples, no self-consistency.
/// Transport failures are retried per the provider policy and then recorded
/// as parse-failed records; authentication rejections abort the run.
/// Already-journaled puzzles are not re-requested, and the returned records
/// follow dataset order.
pub fn run_eval(
    puzzles: &[Puzzle],
    provider: &ProviderConfig,
    style: PromptStyle,
    journal_path: &Path,
) -> Result<Vec<EvalRecord>, EvalError> {
    check_unique_ids(puzzles)?;
    let client = ChatClient::new(provider.clone())?;
    let mut journal: HashMap<u64, EvalRecord> = load_journal(journal_path)?
        .into_iter()
        .map(|r| (r.puzzle_id, r))
        .collect();
    let mut writer = JournalWriter::open(journal_path)?;

    // render everything up front so style mismatches fail before any traffic
    let pending: Vec<(&Puzzle, String)> = puzzles
        .iter()
        .filter(|p| !journal.contains_key(&p.seed()))
        .map(|p| render_prompt(p, style).map(|prompt| (p, prompt)))
        .collect::<Result<_, _>>()?;

    let cursor = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<EvalRecord, ClientError>>();
    let workers = provider.max_concurrency.min(pending.len().max(1));

    let mut auth_failure = None;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let cursor = &cursor;
            let abort = &abort;
            let client = &client;
            let pending = &pending;
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= pending.len() {
                    break;
                }
                let (puzzle, prompt) = &pending[i];
                let message = match client.complete(prompt) {
                    Ok(resp) => Ok(grade_response(
                        puzzle,
                        prompt.clone(),
                        resp.content,
                        resp.output_tokens,
                    )),
                    Err(ClientError::Auth(code)) => {
                        abort.store(true, Ordering::Relaxed);
                        Err(ClientError::Auth(code))
                    }
                    // retries exhausted: record the failure and move on
                    Err(e) => Ok(grade_response(
                        puzzle,
                        prompt.clone(),
                        format!("[request failed: {e}]"),
                        0,
                    )),
                };
                if message.is_ok() || matches!(message, Err(ClientError::Auth(_))) {
                    let _ = tx.send(message);
                }
            });
        }
        drop(tx);
        // single journal writer
        for message in rx.iter() {
            match message {
                Ok(record) => {
                    if writer.append(&record).is_ok() {
                        journal.insert(record.puzzle_id, record);
                    }
                }
                Err(e) => auth_failure = Some(e),
            }
        }
    });
    if let Some(e) = auth_failure {
        return Err(e.into());
    }

    Ok(puzzles
        .iter()
        .filter_map(|p| journal.get(&p.seed()).cloned())
        .collect())
}
