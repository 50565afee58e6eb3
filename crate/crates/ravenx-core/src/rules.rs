//! The rule library governing attribute rows.
//!
//! Nine concrete executors cover the four rule families: constant rows,
//! arithmetic sum/difference, progression by ±1/±2, and distribute-n with a
//! left or right cyclic shift per row. Integer semantics live here; the
//! probabilistic counterparts are in [`crate::solver`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of rule executors.
pub const RULE_COUNT: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Constant,
    ArithPlus,
    ArithMinus,
    #[serde(rename = "prog_plus_1")]
    ProgPlus1,
    #[serde(rename = "prog_minus_1")]
    ProgMinus1,
    #[serde(rename = "prog_plus_2")]
    ProgPlus2,
    #[serde(rename = "prog_minus_2")]
    ProgMinus2,
    DistShiftLeft,
    DistShiftRight,
}

/// Cyclic shift direction for distribute-n rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDir {
    Left,
    Right,
}

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("rule {rule:?} is not feasible for grid with {grid_cols} columns and range {range_m}")]
    Infeasible { rule: RuleKind, grid_cols: u32, range_m: u32 },
}

impl RuleKind {
    pub const ALL: [RuleKind; RULE_COUNT] = [
        RuleKind::Constant,
        RuleKind::ArithPlus,
        RuleKind::ArithMinus,
        RuleKind::ProgPlus1,
        RuleKind::ProgMinus1,
        RuleKind::ProgPlus2,
        RuleKind::ProgMinus2,
        RuleKind::DistShiftLeft,
        RuleKind::DistShiftRight,
    ];

    /// Stable index into rule-indexed arrays (confidence vectors, priors).
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&r| r == self).unwrap()
    }

    /// Step size for progression rules.
    pub fn prog_step(self) -> Option<i64> {
        match self {
            RuleKind::ProgPlus1 => Some(1),
            RuleKind::ProgMinus1 => Some(-1),
            RuleKind::ProgPlus2 => Some(2),
            RuleKind::ProgMinus2 => Some(-2),
            _ => None,
        }
    }

    pub fn shift_dir(self) -> Option<ShiftDir> {
        match self {
            RuleKind::DistShiftLeft => Some(ShiftDir::Left),
            RuleKind::DistShiftRight => Some(ShiftDir::Right),
            _ => None,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, RuleKind::ArithPlus | RuleKind::ArithMinus)
    }

    /// Whether a rule can generate at least two distinct valid rows for the
    /// given geometry. A rule whose row is forced (or impossible) is excluded
    /// from sampling: a forced row repeats across the grid and carries no
    /// signal, and arithmetic rows sample their operand panels from
    /// `[1, m-1]` so that a sum and a difference row can never coincide.
    pub fn feasible(self, grid_cols: u32, range_m: u32) -> bool {
        let g = grid_cols as i64;
        let m = range_m as i64;
        match self {
            RuleKind::Constant => m >= 2,
            // operands x_1..x_{g-1} >= 1, final value sum <= m-1
            RuleKind::ArithPlus => m - 1 > g - 1,
            // operands x_2..x_{g-1} >= 1, minuend x_1 <= m-1, result >= 0
            RuleKind::ArithMinus => m - 1 > g - 2,
            RuleKind::ProgPlus1 | RuleKind::ProgMinus1 => m >= g + 1,
            RuleKind::ProgPlus2 | RuleKind::ProgMinus2 => m >= 2 * (g - 1) + 2,
            // g distinct values in [0, m-1]
            RuleKind::DistShiftLeft | RuleKind::DistShiftRight => m >= g,
        }
    }
}

/// Rotate a row one position in the given direction.
/// Left: `[a,b,c] -> [b,c,a]`; right: `[a,b,c] -> [c,a,b]`.
pub fn rotate(row: &[u32], dir: ShiftDir) -> Vec<u32> {
    let g = row.len();
    (0..g)
        .map(|i| match dir {
            ShiftDir::Left => row[(i + 1) % g],
            ShiftDir::Right => row[(i + g - 1) % g],
        })
        .collect()
}

/// Index in row `i+1` where the value of row `i`'s position `j` reappears.
pub fn shift_map(j: usize, g: usize, dir: ShiftDir) -> usize {
    match dir {
        ShiftDir::Left => (j + g - 1) % g,
        ShiftDir::Right => (j + 1) % g,
    }
}

fn all_distinct(row: &[u32]) -> bool {
    let mut sorted = row.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Whether a single complete row satisfies a within-row rule. Distribute
/// rules relate consecutive rows, so here they only demand distinct values.
pub fn row_satisfies(rule: RuleKind, row: &[u32]) -> bool {
    let g = row.len();
    match rule {
        RuleKind::Constant => row.iter().all(|&v| v == row[0]),
        RuleKind::ArithPlus => {
            let sum: i64 = row[..g - 1].iter().map(|&v| v as i64).sum();
            sum == row[g - 1] as i64
        }
        RuleKind::ArithMinus => {
            let rest: i64 = row[1..g - 1].iter().map(|&v| v as i64).sum();
            row[0] as i64 - rest == row[g - 1] as i64
        }
        RuleKind::ProgPlus1 | RuleKind::ProgMinus1 | RuleKind::ProgPlus2 | RuleKind::ProgMinus2 => {
            let c = rule.prog_step().unwrap();
            row.windows(2).all(|w| w[1] as i64 - w[0] as i64 == c)
        }
        RuleKind::DistShiftLeft | RuleKind::DistShiftRight => all_distinct(row),
    }
}

/// Whether a rule explains the two complete top rows of a grid.
pub fn fits_rows_1_2(rule: RuleKind, row1: &[u32], row2: &[u32]) -> bool {
    match rule.shift_dir() {
        Some(dir) => {
            all_distinct(row1) && rotate(row1, dir) == row2
        }
        None => row_satisfies(rule, row1) && row_satisfies(rule, row2),
    }
}

/// The value that completes row 3 under `rule`, given the visible context:
/// complete rows 1-2 and row 3 minus its last cell. `None` when the rule
/// cannot be completed in range (or the context already contradicts it).
pub fn completion(
    rule: RuleKind,
    row1: &[u32],
    row3_context: &[u32],
    range_m: u32,
) -> Option<u32> {
    let g = row1.len();
    let m = range_m as i64;
    let fits = |v: i64| -> Option<u32> { (v >= 0 && v < m).then_some(v as u32) };
    match rule {
        RuleKind::Constant => {
            let c = row3_context[0];
            row3_context.iter().all(|&v| v == c).then_some(c)
        }
        RuleKind::ArithPlus => fits(row3_context.iter().map(|&v| v as i64).sum()),
        RuleKind::ArithMinus => {
            let rest: i64 = row3_context[1..].iter().map(|&v| v as i64).sum();
            fits(row3_context[0] as i64 - rest)
        }
        RuleKind::ProgPlus1 | RuleKind::ProgMinus1 | RuleKind::ProgPlus2 | RuleKind::ProgMinus2 => {
            let c = rule.prog_step().unwrap();
            let consistent = row3_context
                .windows(2)
                .all(|w| w[1] as i64 - w[0] as i64 == c);
            if !consistent {
                return None;
            }
            fits(*row3_context.last().unwrap() as i64 + c)
        }
        RuleKind::DistShiftLeft => Some(row1[(g - 1 + 2) % g]),
        RuleKind::DistShiftRight => Some(row1[(g - 1 + g - 2) % g]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_serde_names_are_stable() {
        let names: Vec<String> = RuleKind::ALL
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        assert_eq!(
            names,
            vec![
                "\"constant\"",
                "\"arith_plus\"",
                "\"arith_minus\"",
                "\"prog_plus_1\"",
                "\"prog_minus_1\"",
                "\"prog_plus_2\"",
                "\"prog_minus_2\"",
                "\"dist_shift_left\"",
                "\"dist_shift_right\"",
            ]
        );
    }

    #[test]
    fn row_semantics() {
        assert!(row_satisfies(RuleKind::Constant, &[5, 5, 5]));
        assert!(!row_satisfies(RuleKind::Constant, &[5, 5, 4]));
        // sum of the first panels gives the last
        assert!(row_satisfies(RuleKind::ArithPlus, &[3, 4, 7]));
        assert!(!row_satisfies(RuleKind::ArithMinus, &[3, 4, 7]));
        assert!(row_satisfies(RuleKind::ArithMinus, &[7, 4, 3]));
        assert!(row_satisfies(RuleKind::ProgMinus1, &[16, 15, 14]));
        assert!(row_satisfies(RuleKind::ProgPlus2, &[1, 3, 5]));
    }

    #[test]
    fn rotation_matches_observed_distribute_pattern() {
        // a distribute-three grid rotates left one position per row
        let row1 = vec![6, 7, 70, 93, 88, 77, 83, 22, 39, 27];
        let row2 = rotate(&row1, ShiftDir::Left);
        assert_eq!(row2[..3], [7, 70, 93]);
        let row3 = rotate(&row2, ShiftDir::Left);
        assert_eq!(row3[..3], [70, 93, 88]);
        // the missing cell (3, g) holds row1[1]
        assert_eq!(row3[9], 7);
        assert_eq!(
            completion(RuleKind::DistShiftLeft, &row1, &row3[..9], 100),
            Some(7)
        );
    }

    #[test]
    fn feasibility_excludes_overflowing_rules() {
        // 3x3 at range 10: everything fits
        for rule in RuleKind::ALL {
            assert!(rule.feasible(3, 10), "{rule:?} should be feasible at 3x3/10");
        }
        // 3x10 at range 10: a nine-panel sum cannot stay in range
        assert!(!RuleKind::ArithPlus.feasible(10, 10));
        assert!(!RuleKind::ProgPlus2.feasible(10, 10));
        assert!(RuleKind::DistShiftLeft.feasible(10, 10));
        // the acceptance geometries support all nine rules
        for rule in RuleKind::ALL {
            assert!(rule.feasible(10, 100));
            assert!(rule.feasible(10, 1000));
        }
    }

    #[test]
    fn completion_respects_context() {
        assert_eq!(completion(RuleKind::Constant, &[1, 1, 1], &[4, 4], 10), Some(4));
        assert_eq!(completion(RuleKind::Constant, &[1, 1, 1], &[4, 5], 10), None);
        assert_eq!(completion(RuleKind::ArithPlus, &[1, 2, 3], &[4, 5], 10), Some(9));
        assert_eq!(completion(RuleKind::ArithPlus, &[1, 2, 3], &[5, 5], 10), None);
        assert_eq!(completion(RuleKind::ProgPlus1, &[1, 2, 3], &[7, 8], 10), Some(9));
        assert_eq!(completion(RuleKind::ProgMinus2, &[9, 7, 5], &[4, 2], 10), Some(0));
    }
}
