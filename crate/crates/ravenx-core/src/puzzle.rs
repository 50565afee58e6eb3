//! Puzzle and panel types with invariant checking.
//!
//! A puzzle is a 3×g context grid in the `center` constellation (one object
//! per panel, three true attributes) with the bottom-right cell missing, plus
//! an unbiased 8-candidate answer set built as the Cartesian product of a
//! correct and an alternative value over the three attributes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pmf::SparsePmf;
use crate::rules::{self, RuleKind};

/// Number of true reasoning attributes in the center constellation.
pub const TRUE_ATTRS: usize = 3;
/// Size of the candidate answer set (2^3 attribute forks).
pub const CANDIDATES: usize = 8;
/// Number of context rows.
pub const ROWS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum PuzzleError {
    #[error("panel must have exactly {TRUE_ATTRS} true attributes, got {0}")]
    BadAttrCount(usize),
    #[error("pmf range {found} differs from puzzle range {expected}")]
    RangeMismatch { expected: u32, found: u32 },
    #[error("grid must have 3 or 10 columns, got {0}")]
    BadGridCols(u32),
    #[error("range must be one of 10, 100, 1000, got {0}")]
    BadRange(u32),
    #[error("context must hold {expected} panels, got {found}")]
    BadContextLen { expected: usize, found: usize },
    #[error("candidate set must hold {CANDIDATES} panels, got {0}")]
    BadCandidateCount(usize),
    #[error("answer index {0} out of range [0, 7]")]
    BadAnswerIndex(u8),
    #[error("panel has {found} confounders, expected {expected}")]
    ConfounderMismatch { expected: usize, found: usize },
}

/// One cell of the matrix: three true attributes plus any confounders,
/// each a PMF over the puzzle's value range.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    true_attrs: Vec<SparsePmf>,
    confounders: Vec<SparsePmf>,
}

impl Panel {
    pub fn new(true_attrs: Vec<SparsePmf>, confounders: Vec<SparsePmf>) -> Result<Self, PuzzleError> {
        if true_attrs.len() != TRUE_ATTRS {
            return Err(PuzzleError::BadAttrCount(true_attrs.len()));
        }
        Ok(Panel { true_attrs, confounders })
    }

    /// A clean panel: degenerate PMFs at the given attribute values.
    pub fn degenerate(values: [u32; TRUE_ATTRS], range_m: u32) -> Self {
        Panel {
            true_attrs: values
                .iter()
                .map(|&v| SparsePmf::degenerate(v, range_m).expect("value in range"))
                .collect(),
            confounders: Vec::new(),
        }
    }

    pub fn true_attrs(&self) -> &[SparsePmf] {
        &self.true_attrs
    }

    pub fn confounders(&self) -> &[SparsePmf] {
        &self.confounders
    }

    /// All attributes in prompt order: true attributes then confounders.
    pub fn attrs(&self) -> impl Iterator<Item = &SparsePmf> {
        self.true_attrs.iter().chain(self.confounders.iter())
    }

    /// Attribute by flat index (true attributes first).
    pub fn attr(&self, index: usize) -> &SparsePmf {
        if index < TRUE_ATTRS {
            &self.true_attrs[index]
        } else {
            &self.confounders[index - TRUE_ATTRS]
        }
    }

    pub fn attr_count(&self) -> usize {
        TRUE_ATTRS + self.confounders.len()
    }

    /// Modal values of the true attributes.
    pub fn modal_values(&self) -> [u32; TRUE_ATTRS] {
        [
            self.true_attrs[0].mode(),
            self.true_attrs[1].mode(),
            self.true_attrs[2].mode(),
        ]
    }

    pub fn is_degenerate(&self) -> bool {
        self.attrs().all(|p| p.is_degenerate())
    }

    pub(crate) fn push_confounder(&mut self, pmf: SparsePmf) {
        self.confounders.push(pmf);
    }

    pub(crate) fn map_attrs<E>(
        &self,
        mut f: impl FnMut(&SparsePmf, bool) -> Result<SparsePmf, E>,
    ) -> Result<Panel, E> {
        Ok(Panel {
            true_attrs: self
                .true_attrs
                .iter()
                .map(|p| f(p, false))
                .collect::<Result<_, E>>()?,
            confounders: self
                .confounders
                .iter()
                .map(|p| f(p, true))
                .collect::<Result<_, E>>()?,
        })
    }
}

/// A generated puzzle instance. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Puzzle {
    grid_cols: u32,
    range_m: u32,
    seed: u64,
    n_confounders: u32,
    rules: [RuleKind; TRUE_ATTRS],
    answer_index: u8,
    context: Vec<Panel>,
    candidates: Vec<Panel>,
}

impl Puzzle {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid_cols: u32,
        range_m: u32,
        seed: u64,
        n_confounders: u32,
        rules: [RuleKind; TRUE_ATTRS],
        answer_index: u8,
        context: Vec<Panel>,
        candidates: Vec<Panel>,
    ) -> Result<Self, PuzzleError> {
        if grid_cols != 3 && grid_cols != 10 {
            return Err(PuzzleError::BadGridCols(grid_cols));
        }
        if !matches!(range_m, 10 | 100 | 1000) {
            return Err(PuzzleError::BadRange(range_m));
        }
        let expected = ROWS * grid_cols as usize - 1;
        if context.len() != expected {
            return Err(PuzzleError::BadContextLen { expected, found: context.len() });
        }
        if candidates.len() != CANDIDATES {
            return Err(PuzzleError::BadCandidateCount(candidates.len()));
        }
        if answer_index as usize >= CANDIDATES {
            return Err(PuzzleError::BadAnswerIndex(answer_index));
        }
        let p = Puzzle {
            grid_cols,
            range_m,
            seed,
            n_confounders,
            rules,
            answer_index,
            context,
            candidates,
        };
        for panel in p.panels() {
            for pmf in panel.attrs() {
                if pmf.range_m() != range_m {
                    return Err(PuzzleError::RangeMismatch {
                        expected: range_m,
                        found: pmf.range_m(),
                    });
                }
            }
            if panel.confounders.len() != n_confounders as usize {
                return Err(PuzzleError::ConfounderMismatch {
                    expected: n_confounders as usize,
                    found: panel.confounders.len(),
                });
            }
        }
        Ok(p)
    }

    pub fn grid_cols(&self) -> u32 {
        self.grid_cols
    }

    pub fn range_m(&self) -> u32 {
        self.range_m
    }

    /// The per-puzzle derived seed; doubles as the puzzle id in datasets.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_confounders(&self) -> u32 {
        self.n_confounders
    }

    pub fn rules(&self) -> [RuleKind; TRUE_ATTRS] {
        self.rules
    }

    pub fn answer_index(&self) -> u8 {
        self.answer_index
    }

    /// Context panels in row-major order; cell (3, g) is absent.
    pub fn context(&self) -> &[Panel] {
        &self.context
    }

    pub fn candidates(&self) -> &[Panel] {
        &self.candidates
    }

    /// Panels of context row `row` (0-based); row 2 is one short.
    pub fn row(&self, row: usize) -> &[Panel] {
        let g = self.grid_cols as usize;
        let start = row * g;
        let end = if row == ROWS - 1 { self.context.len() } else { start + g };
        &self.context[start..end]
    }

    /// Total attributes per panel (true + confounders).
    pub fn attr_count(&self) -> usize {
        TRUE_ATTRS + self.n_confounders as usize
    }

    /// PMFs of one attribute along one context row.
    pub fn attr_row(&self, row: usize, attr: usize) -> Vec<&SparsePmf> {
        self.row(row).iter().map(|panel| panel.attr(attr)).collect()
    }

    /// Modal values of one true attribute along one context row.
    pub fn modal_row(&self, row: usize, attr: usize) -> Vec<u32> {
        self.row(row).iter().map(|panel| panel.attr(attr).mode()).collect()
    }

    pub fn panels(&self) -> impl Iterator<Item = &Panel> {
        self.context.iter().chain(self.candidates.iter())
    }

    /// True when every PMF in the puzzle is degenerate and no confounders
    /// are present: the oracle-perception setting.
    pub fn is_clean(&self) -> bool {
        self.n_confounders == 0 && self.panels().all(|p| p.is_degenerate())
    }

    pub(crate) fn map_panels<E>(
        &self,
        mut f: impl FnMut(&Panel) -> Result<Panel, E>,
    ) -> Result<Puzzle, E> {
        let context = self.context.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
        let candidates = self.candidates.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
        Ok(Puzzle { context, candidates, ..self.clone() })
    }

    pub(crate) fn with_confounder_count(mut self, k: u32) -> Self {
        self.n_confounders = k;
        self
    }
}

/// A machine-checkable invariant violation found by [`validate_puzzle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Violation { field: field.to_string(), message: message.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Check every puzzle invariant, including the deep ones: the bisection
/// structure of the candidate set and brute-force uniqueness of the
/// rule-consistent candidate over modal values. Violations are returned,
/// not thrown; an empty list means the puzzle is sound.
pub fn validate_puzzle(p: &Puzzle) -> Vec<Violation> {
    let mut out = Vec::new();
    let g = p.grid_cols as usize;

    // structural checks beyond what construction enforces
    for (i, row) in (0..ROWS).map(|r| (r, p.row(r))) {
        let expect = if i == ROWS - 1 { g - 1 } else { g };
        if row.len() != expect {
            out.push(Violation::new("context", format!("row {} has {} panels", i + 1, row.len())));
        }
    }

    // candidate set: exactly two values per attribute, all 8 combinations
    let answer = &p.candidates[p.answer_index as usize];
    let correct = answer.modal_values();
    let mut alts = [None::<u32>; TRUE_ATTRS];
    for attr in 0..TRUE_ATTRS {
        let mut values: Vec<u32> = p.candidates.iter().map(|c| c.true_attrs()[attr].mode()).collect();
        values.sort_unstable();
        values.dedup();
        if values.len() != 2 {
            out.push(Violation::new(
                "candidates",
                format!("attribute {} takes {} distinct values, expected 2", attr + 1, values.len()),
            ));
        } else {
            alts[attr] = values.into_iter().find(|&v| v != correct[attr]);
        }
    }
    let mut combos: Vec<[u32; TRUE_ATTRS]> = p.candidates.iter().map(|c| c.modal_values()).collect();
    combos.sort_unstable();
    combos.dedup();
    if combos.len() != CANDIDATES {
        out.push(Violation::new("candidates", "candidate tuples are not all distinct"));
    }

    // exactly one candidate satisfies all three ground-truth rules against
    // the modal context
    let consistent: Vec<usize> = (0..p.candidates.len())
        .filter(|&c| candidate_consistent(p, c))
        .collect();
    if consistent != vec![p.answer_index as usize] {
        out.push(Violation::new(
            "answer_index",
            format!("rule-consistent candidates are {consistent:?}, expected [{}]", p.answer_index),
        ));
    }

    out
}

/// Whether candidate `c` completes every attribute's annotated rule when the
/// grid is read through modal values.
fn candidate_consistent(p: &Puzzle, c: usize) -> bool {
    let cand = &p.candidates[c];
    (0..TRUE_ATTRS).all(|attr| {
        let row1 = p.modal_row(0, attr);
        let row3_ctx = p.modal_row(2, attr);
        rules::completion(p.rules()[attr], &row1, &row3_ctx, p.range_m)
            == Some(cand.true_attrs()[attr].mode())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_3x3;

    #[test]
    fn fixture_is_valid() {
        let p = fixture_3x3();
        assert!(p.is_clean());
        assert_eq!(validate_puzzle(&p), vec![]);
    }

    #[test]
    fn detects_double_solution() {
        let mut p = fixture_3x3();
        // make a distractor identical to the answer
        p.candidates[0] = p.candidates[5].clone();
        let violations = validate_puzzle(&p);
        assert!(violations.iter().any(|v| v.field == "answer_index"));
        assert!(violations.iter().any(|v| v.field == "candidates"));
    }

    #[test]
    fn detects_short_candidate_set() {
        let p = fixture_3x3();
        let err = Puzzle::new(
            p.grid_cols,
            p.range_m,
            p.seed,
            0,
            p.rules,
            p.answer_index,
            p.context.clone(),
            p.candidates[..7].to_vec(),
        )
        .unwrap_err();
        assert_eq!(err, PuzzleError::BadCandidateCount(7));
    }

    #[test]
    fn row_accessor_handles_missing_cell() {
        let p = fixture_3x3();
        assert_eq!(p.row(0).len(), 3);
        assert_eq!(p.row(2).len(), 2);
        assert_eq!(p.modal_row(2, 0), vec![6, 4]);
    }
}
