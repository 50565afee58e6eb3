//! Probabilistic abductive solver.
//!
//! For every attribute the solver abduces a confidence vector `s` over the
//! nine rules from the first two rows, predicts the missing panel's PMF under
//! each rule from the third-row context, and scores each candidate by the
//! confidence-weighted agreement between prediction and candidate. Attribute
//! contributions are divided by the entropy of `s`, which damps attributes
//! (confounders above all) whose confidence is spread evenly because nothing
//! explains them.
//!
//! Rule fits on rows of PMFs marginalize over value assignments consistent
//! with the rule:
//!
//! - constant: `Σ_v Π_i p_i(v)` per row;
//! - arithmetic: agreement of the convolution (or difference distribution)
//!   of the leading panels with the last panel;
//! - progression by `c`: `Σ_v Π_i p_i(v + c(i-1))` per row;
//! - distribute shift: `Π_i ⟨p_{1,i}, p_{2,σ(i)}⟩` across rows 1-2, with `σ`
//!   the cyclic shift map.
//!
//! Within-row fits multiply over rows 1 and 2. On degenerate inputs every
//! fit is exactly 1 when the integer rows satisfy the rule and 0 when no
//! consistent assignment exists.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{convolve_pmfs, MassFn};
use crate::pmf::SparsePmf;
use crate::puzzle::{Puzzle, CANDIDATES, TRUE_ATTRS};
use crate::rules::{shift_map, RuleKind, RULE_COUNT};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("rows have different lengths: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("attribute index {index} out of range for {available} attributes")]
    BadAttrIndex { index: usize, available: usize },
    #[error("rule {0:?} has empty predicted support in range")]
    EmptyPrediction(RuleKind),
}

/// Scoring parameters. Defaults follow the reference configuration:
/// natural-log entropy floored at `1e-3`, additive smoothing `1e-9`,
/// uniform rule priors, entropy weighting on.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub entropy_weighting: bool,
    /// Lower clamp for `H(s)`; Eq-style division by entropy needs a floor
    /// once confidence becomes one-hot.
    pub entropy_floor: f64,
    /// Additive smoothing applied before normalizing `s`.
    pub epsilon: f64,
    /// Learnable rule priors `w`; the confidence uses `softmax(w)`.
    pub rule_priors: [f64; RULE_COUNT],
    /// Whether confounder attributes join the candidate score. Filtering
    /// them out would bypass the entropy mechanism, so they are in by
    /// default.
    pub include_confounders: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            entropy_weighting: true,
            entropy_floor: 1e-3,
            epsilon: 1e-9,
            rule_priors: [0.0; RULE_COUNT],
            include_confounders: true,
        }
    }
}

impl SolverConfig {
    pub fn without_entropy_weighting(mut self) -> Self {
        self.entropy_weighting = false;
        self
    }
}

/// Per-attribute confidence over the nine rules, with its entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceVector {
    /// Raw confidences: rule fit times prior.
    pub s: [f64; RULE_COUNT],
    /// `(s + ε)` normalized to sum 1.
    pub s_normalized: [f64; RULE_COUNT],
    /// `-Σ p ln p` over `s_normalized`, clamped to the entropy floor.
    pub entropy: f64,
}

/// Softmax of the rule priors.
pub fn softmax(w: &[f64; RULE_COUNT]) -> [f64; RULE_COUNT] {
    let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; RULE_COUNT];
    let mut total = 0.0;
    for (o, &x) in out.iter_mut().zip(w.iter()) {
        *o = (x - max).exp();
        total += *o;
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

fn pointwise_product_total(pmfs: &[&SparsePmf], offsets: Option<&[i64]>) -> f64 {
    let shifted = |i: usize| {
        let mass = MassFn::from_pmf(pmfs[i]);
        match offsets {
            Some(o) => mass.shift(o[i]),
            None => mass,
        }
    };
    let mut acc = shifted(0);
    for i in 1..pmfs.len() {
        if acc.is_empty() {
            return 0.0;
        }
        acc = acc.pointwise_mul(&shifted(i));
    }
    acc.total()
}

/// Fit of a within-row rule on one complete row of PMFs.
fn fit_row(rule: RuleKind, row: &[&SparsePmf]) -> f64 {
    let g = row.len();
    match rule {
        RuleKind::Constant => pointwise_product_total(row, None),
        RuleKind::ArithPlus => {
            let sum = convolve_pmfs(row[..g - 1].iter().copied()).expect("row is non-empty");
            sum.inner_pmf(row[g - 1])
        }
        RuleKind::ArithMinus => {
            let rest = convolve_pmfs(row[1..g - 1].iter().copied()).expect("row is non-empty");
            MassFn::from_pmf(row[0])
                .cross_correlate(&rest)
                .inner_pmf(row[g - 1])
        }
        RuleKind::ProgPlus1 | RuleKind::ProgMinus1 | RuleKind::ProgPlus2 | RuleKind::ProgMinus2 => {
            let c = rule.prog_step().unwrap();
            // evaluate each panel at v + c(i-1): shift supports back to the start
            let offsets: Vec<i64> = (0..g as i64).map(|i| -c * i).collect();
            pointwise_product_total(row, Some(&offsets))
        }
        RuleKind::DistShiftLeft | RuleKind::DistShiftRight => {
            unreachable!("distribute rules are cross-row; handled in rule_fit")
        }
    }
}

/// Likelihood that `kind` explains the first two rows.
pub fn rule_fit(
    kind: RuleKind,
    row1: &[&SparsePmf],
    row2: &[&SparsePmf],
) -> Result<f64, SolverError> {
    if row1.len() != row2.len() {
        return Err(SolverError::DimensionMismatch(row1.len(), row2.len()));
    }
    let g = row1.len();
    match kind.shift_dir() {
        Some(dir) => {
            let mut fit = 1.0;
            for j in 0..g {
                fit *= row1[j].inner(row2[shift_map(j, g, dir)]);
                if fit == 0.0 {
                    break;
                }
            }
            Ok(fit)
        }
        None => Ok(fit_row(kind, row1) * fit_row(kind, row2)),
    }
}

/// Predicted PMF of the missing cell (3, g) under `kind`, given row 1 (for
/// the distribute source) and the third-row context.
pub fn predict_pmf(
    kind: RuleKind,
    row1: &[&SparsePmf],
    row3_context: &[&SparsePmf],
    range_m: u32,
) -> Result<SparsePmf, SolverError> {
    predict_opt(kind, row1, row3_context, range_m).ok_or(SolverError::EmptyPrediction(kind))
}

fn predict_opt(
    kind: RuleKind,
    row1: &[&SparsePmf],
    row3_context: &[&SparsePmf],
    range_m: u32,
) -> Option<SparsePmf> {
    let g = row1.len();
    match kind {
        RuleKind::Constant => {
            let mut acc = MassFn::from_pmf(row3_context[0]);
            for pmf in &row3_context[1..] {
                acc = acc.pointwise_mul(&MassFn::from_pmf(pmf));
            }
            // all-zero product means the context cannot agree on a value;
            // fall back to total ignorance
            acc.into_pmf_in_range(range_m)
                .or_else(|| Some(SparsePmf::uniform(range_m)))
        }
        RuleKind::ArithPlus => convolve_pmfs(row3_context.iter().copied())?.into_pmf_in_range(range_m),
        RuleKind::ArithMinus => {
            let rest = convolve_pmfs(row3_context[1..].iter().copied())?;
            MassFn::from_pmf(row3_context[0])
                .cross_correlate(&rest)
                .into_pmf_in_range(range_m)
        }
        RuleKind::ProgPlus1 | RuleKind::ProgMinus1 | RuleKind::ProgPlus2 | RuleKind::ProgMinus2 => {
            let c = kind.prog_step().unwrap();
            // panel i (1-based) sits c(g-i) steps before the missing cell
            let mut acc: Option<MassFn> = None;
            for (i, pmf) in row3_context.iter().enumerate() {
                let offset = c * (g - 1 - i) as i64;
                let shifted = MassFn::from_pmf(pmf).shift(offset);
                acc = Some(match acc {
                    Some(a) => a.pointwise_mul(&shifted),
                    None => shifted,
                });
            }
            acc?.into_pmf_in_range(range_m)
        }
        RuleKind::DistShiftLeft => Some(row1[(g - 1 + 2) % g].clone()),
        RuleKind::DistShiftRight => Some(row1[(g - 1 + g - 2) % g].clone()),
    }
}

/// Abduce the rule-confidence vector for one attribute (true attributes
/// first, then confounders) from the first two rows.
pub fn abduce_confidence(
    puzzle: &Puzzle,
    attr_index: usize,
    cfg: &SolverConfig,
) -> Result<ConfidenceVector, SolverError> {
    if attr_index >= puzzle.attr_count() {
        return Err(SolverError::BadAttrIndex {
            index: attr_index,
            available: puzzle.attr_count(),
        });
    }
    let row1 = puzzle.attr_row(0, attr_index);
    let row2 = puzzle.attr_row(1, attr_index);
    let priors = softmax(&cfg.rule_priors);
    let mut s = [0.0; RULE_COUNT];
    for rule in RuleKind::ALL {
        s[rule.index()] = rule_fit(rule, &row1, &row2)? * priors[rule.index()];
    }
    Ok(confidence_from_raw(s, cfg))
}

/// Normalize raw confidences and compute the clamped entropy.
pub(crate) fn confidence_from_raw(s: [f64; RULE_COUNT], cfg: &SolverConfig) -> ConfidenceVector {
    let total: f64 = s.iter().map(|&x| x + cfg.epsilon).sum();
    let mut s_normalized = [0.0; RULE_COUNT];
    for (n, &x) in s_normalized.iter_mut().zip(s.iter()) {
        *n = (x + cfg.epsilon) / total;
    }
    let entropy = s_normalized
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(cfg.entropy_floor);
    ConfidenceVector { s, s_normalized, entropy }
}

/// The outcome of scoring one puzzle.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Total score per candidate.
    pub scores: [f64; CANDIDATES],
    /// Argmax of the scores; ties break to the lowest index.
    pub predicted_index: u8,
    /// Per-attribute confidence vectors, in flat attribute order.
    pub confidences: Vec<ConfidenceVector>,
}

/// Per-attribute agreement of every rule's prediction with every candidate:
/// `agreement[c][r] = ⟨predict_pmf(r), candidate c⟩`, 0 when the rule has no
/// in-range prediction.
pub(crate) fn agreement_matrix(
    puzzle: &Puzzle,
    attr_index: usize,
) -> [[f64; RULE_COUNT]; CANDIDATES] {
    let row1 = puzzle.attr_row(0, attr_index);
    let row3_ctx = puzzle.attr_row(2, attr_index);
    let mut agreement = [[0.0; RULE_COUNT]; CANDIDATES];
    for rule in RuleKind::ALL {
        if let Some(pred) = predict_opt(rule, &row1, &row3_ctx, puzzle.range_m()) {
            for (c, cand) in puzzle.candidates().iter().enumerate() {
                agreement[c][rule.index()] = pred.inner(cand.attr(attr_index));
            }
        }
    }
    agreement
}

fn scored_attrs(puzzle: &Puzzle, cfg: &SolverConfig) -> usize {
    if cfg.include_confounders {
        puzzle.attr_count()
    } else {
        TRUE_ATTRS
    }
}

/// Score all eight candidates:
/// `S(c) = Σ_attr S_attr(c) / H(s_attr)` with
/// `S_attr(c) = Σ_r ŝ_r ⟨predict_pmf(r), candidate c⟩` (the division is
/// dropped when entropy weighting is off).
pub fn score_candidates(puzzle: &Puzzle, cfg: &SolverConfig) -> Result<SolveOutcome, SolverError> {
    let mut scores = [0.0; CANDIDATES];
    let mut confidences = Vec::with_capacity(scored_attrs(puzzle, cfg));
    for attr in 0..scored_attrs(puzzle, cfg) {
        let conf = abduce_confidence(puzzle, attr, cfg)?;
        let agreement = agreement_matrix(puzzle, attr);
        let weight = if cfg.entropy_weighting { 1.0 / conf.entropy } else { 1.0 };
        for (c, row) in agreement.iter().enumerate() {
            let s_attr: f64 = row
                .iter()
                .zip(conf.s_normalized.iter())
                .map(|(&a, &sn)| sn * a)
                .sum();
            scores[c] += weight * s_attr;
        }
        confidences.push(conf);
    }
    let predicted_index = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("scores are finite"))
        .map(|(i, _)| i)
        .unwrap() as u8;
    // max_by returns the last max; re-scan for the lowest index on ties
    let best = scores[predicted_index as usize];
    let predicted_index = scores.iter().position(|&s| s == best).unwrap() as u8;
    Ok(SolveOutcome { scores, predicted_index, confidences })
}

/// One solved puzzle in a dataset run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub puzzle_id: u64,
    pub predicted_index: u8,
    pub answer_index: u8,
    pub solve_time_ms: f64,
}

/// Solve a dataset sequentially, recording the wall-clock time per puzzle.
pub fn solve_dataset(
    puzzles: &[Puzzle],
    cfg: &SolverConfig,
) -> Result<Vec<Prediction>, SolverError> {
    puzzles
        .iter()
        .map(|p| {
            let start = Instant::now();
            let outcome = score_candidates(p, cfg)?;
            Ok(Prediction {
                puzzle_id: p.seed(),
                predicted_index: outcome.predicted_index,
                answer_index: p.answer_index(),
                solve_time_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}
