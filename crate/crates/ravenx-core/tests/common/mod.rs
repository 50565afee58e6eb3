//! Independent oracles, written from the rule definitions alone.
//!
//! Nothing here calls into the library's rule or fit machinery: rows are
//! checked with straight integer loops and probabilistic fits with full
//! enumeration, so these can arbitrate when the implementation is wrong.
#![allow(dead_code)] // each test binary uses its own slice of the oracle

use ravenx_core::pmf::SparsePmf;
use ravenx_core::puzzle::Puzzle;
use ravenx_core::rules::RuleKind;

/// The nine rule behaviors, re-enumerated independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRule {
    Constant,
    Plus,
    Minus,
    Prog(i64),
    DistLeft,
    DistRight,
}

pub const ORACLE_RULES: [OracleRule; 9] = [
    OracleRule::Constant,
    OracleRule::Plus,
    OracleRule::Minus,
    OracleRule::Prog(1),
    OracleRule::Prog(-1),
    OracleRule::Prog(2),
    OracleRule::Prog(-2),
    OracleRule::DistLeft,
    OracleRule::DistRight,
];

/// Map an oracle rule onto the library's enum, for comparing annotations.
pub fn as_rule_kind(rule: OracleRule) -> RuleKind {
    match rule {
        OracleRule::Constant => RuleKind::Constant,
        OracleRule::Plus => RuleKind::ArithPlus,
        OracleRule::Minus => RuleKind::ArithMinus,
        OracleRule::Prog(1) => RuleKind::ProgPlus1,
        OracleRule::Prog(-1) => RuleKind::ProgMinus1,
        OracleRule::Prog(2) => RuleKind::ProgPlus2,
        OracleRule::Prog(-2) => RuleKind::ProgMinus2,
        OracleRule::Prog(_) => unreachable!("only steps ±1, ±2 exist"),
        OracleRule::DistLeft => RuleKind::DistShiftLeft,
        OracleRule::DistRight => RuleKind::DistShiftRight,
    }
}

fn distinct(row: &[u32]) -> bool {
    row.iter().all(|a| row.iter().filter(|&b| b == a).count() == 1)
}

fn row_ok(rule: OracleRule, row: &[u32]) -> bool {
    let g = row.len();
    match rule {
        OracleRule::Constant => (1..g).all(|i| row[i] == row[0]),
        OracleRule::Plus => {
            let mut sum: i64 = 0;
            for &v in &row[..g - 1] {
                sum += v as i64;
            }
            sum == row[g - 1] as i64
        }
        OracleRule::Minus => {
            let mut acc: i64 = row[0] as i64;
            for &v in &row[1..g - 1] {
                acc -= v as i64;
            }
            acc == row[g - 1] as i64
        }
        OracleRule::Prog(c) => (1..g).all(|i| row[i] as i64 - row[i - 1] as i64 == c),
        // distribute rules constrain single rows only through distinctness
        OracleRule::DistLeft | OracleRule::DistRight => distinct(row),
    }
}

fn rotated(row: &[u32], shift: i64) -> Vec<u32> {
    let g = row.len() as i64;
    (0..g).map(|i| row[((i + shift).rem_euclid(g)) as usize]).collect()
}

/// Whether `rule` explains complete rows 1 and 2.
pub fn fits_first_two(rule: OracleRule, row1: &[u32], row2: &[u32]) -> bool {
    match rule {
        OracleRule::DistLeft => distinct(row1) && rotated(row1, 1) == row2,
        OracleRule::DistRight => distinct(row1) && rotated(row1, -1) == row2,
        _ => row_ok(rule, row1) && row_ok(rule, row2),
    }
}

/// Whether completing row 3 with `candidate` satisfies `rule`, given the
/// first rows (needed for the rotation chain of distribute rules).
pub fn completes(rule: OracleRule, rows: &[Vec<u32>; 2], row3_ctx: &[u32], candidate: u32) -> bool {
    let mut row3 = row3_ctx.to_vec();
    row3.push(candidate);
    match rule {
        OracleRule::DistLeft => rotated(&rows[0], 2) == row3,
        OracleRule::DistRight => rotated(&rows[0], -2) == row3,
        _ => row_ok(rule, &row3),
    }
}

/// Modal integer rows of one attribute, split as (rows 1-2, row-3 context).
pub fn modal_rows(p: &Puzzle, attr: usize) -> ([Vec<u32>; 2], Vec<u32>) {
    ([p.modal_row(0, attr), p.modal_row(1, attr)], p.modal_row(2, attr))
}

/// Candidate indices consistent with the puzzle: for every true attribute
/// some rule must both fit rows 1-2 and be completed by the candidate's
/// value. Enumerates all nine rules per attribute.
pub fn consistent_candidates(p: &Puzzle) -> Vec<usize> {
    (0..p.candidates().len())
        .filter(|&c| {
            (0..3).all(|attr| {
                let (rows, ctx) = modal_rows(p, attr);
                let v = p.candidates()[c].true_attrs()[attr].mode();
                ORACLE_RULES
                    .iter()
                    .any(|&r| fits_first_two(r, &rows[0], &rows[1]) && completes(r, &rows, &ctx, v))
            })
        })
        .collect()
}

/// Exhaustive-assignment fit of a rule on rows of PMFs: sums the product of
/// marginals over every integer assignment consistent with the rule. Only
/// meant for small geometries (g=3, m=10).
pub fn exhaustive_fit(rule: OracleRule, row1: &[SparsePmf], row2: &[SparsePmf]) -> f64 {
    let g = row1.len();
    let m = row1[0].range_m();
    assert!(g == 3 && m <= 10, "oracle enumeration only scales to 3 panels at range 10");
    match rule {
        OracleRule::DistLeft | OracleRule::DistRight => {
            // enumerate row-1 assignments; row 2 must hold the rotation
            let shift = if rule == OracleRule::DistLeft { 1 } else { -1 };
            let mut total = 0.0;
            for v0 in 0..m {
                for v1 in 0..m {
                    for v2 in 0..m {
                        let assignment = [v0, v1, v2];
                        let p1: f64 =
                            (0..g).map(|i| row1[i].prob(assignment[i])).product();
                        if p1 == 0.0 {
                            continue;
                        }
                        let rot = rotated(&assignment, shift);
                        let p2: f64 = (0..g).map(|i| row2[i].prob(rot[i])).product();
                        total += p1 * p2;
                    }
                }
            }
            total
        }
        _ => exhaustive_row_fit(rule, row1) * exhaustive_row_fit(rule, row2),
    }
}

fn exhaustive_row_fit(rule: OracleRule, row: &[SparsePmf]) -> f64 {
    let m = row[0].range_m();
    let mut total = 0.0;
    for v0 in 0..m {
        for v1 in 0..m {
            for v2 in 0..m {
                if row_ok(rule, &[v0, v1, v2]) {
                    total += row[0].prob(v0) * row[1].prob(v1) * row[2].prob(v2);
                }
            }
        }
    }
    total
}
