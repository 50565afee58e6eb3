//! Hand-built reference puzzles used by format tests and the guide.

use crate::puzzle::{Panel, Puzzle};
use crate::rules::RuleKind;

/// A clean 3×3 puzzle at range 10. Attribute 1 distributes right
/// (set {3, 4, 6} rotating one position per row), attributes 2 and 3 are
/// constant within each row. The correct answer is #5: (3,1,7).
pub fn fixture_3x3() -> Puzzle {
    let rows = [
        [[3, 5, 5], [6, 5, 5], [4, 5, 5]],
        [[4, 3, 1], [3, 3, 1], [6, 3, 1]],
    ];
    let mut context: Vec<Panel> = rows
        .iter()
        .flatten()
        .map(|&vals| Panel::degenerate(vals, 10))
        .collect();
    context.push(Panel::degenerate([6, 1, 7], 10));
    context.push(Panel::degenerate([4, 1, 7], 10));
    let combos = [
        [3, 2, 7],
        [7, 1, 5],
        [7, 2, 5],
        [7, 2, 7],
        [7, 1, 7],
        [3, 1, 7],
        [3, 2, 5],
        [3, 1, 5],
    ];
    let candidates = combos.iter().map(|&c| Panel::degenerate(c, 10)).collect();
    Puzzle::new(
        3,
        10,
        0xF1A7,
        0,
        [RuleKind::DistShiftRight, RuleKind::Constant, RuleKind::Constant],
        5,
        context,
        candidates,
    )
    .expect("fixture is structurally sound")
}
