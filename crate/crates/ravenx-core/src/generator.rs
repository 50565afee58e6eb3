//! Deterministic, seedable puzzle generation.
//!
//! Produces 3×3 and 3×10 center-constellation puzzles with bisection-style
//! candidate sets: every candidate is a combination of the correct and one
//! alternative value per attribute, and each alternative is sampled so that
//! it completes no rule that fits the visible context. Datasets are
//! bitwise-deterministic for a fixed seed and config: puzzle `i` is generated
//! from an independent rng seeded by `mix_seed(seed, i)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::puzzle::{Panel, Puzzle, PuzzleError, CANDIDATES, TRUE_ATTRS};
use crate::rules::{self, RuleError, RuleKind, RULE_COUNT};
use crate::seed::mix_seed;

/// Attempt bound for rejection loops.
const MAX_ATTEMPTS: u32 = 1000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("no feasible rule has positive weight for {grid_cols} columns at range {range_m}")]
    NoFeasibleRule { grid_cols: u32, range_m: u32 },
    #[error("no rule-breaking alternative value found after {MAX_ATTEMPTS} attempts")]
    RetryExhausted,
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

/// Generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub grid_cols: u32,
    pub range_m: u32,
    pub n_puzzles: u64,
    pub seed: u64,
    /// Relative sampling weight per rule, indexed by [`RuleKind::index`].
    pub rule_weights: [f64; RULE_COUNT],
}

impl GenConfig {
    pub fn new(grid_cols: u32, range_m: u32, n_puzzles: u64, seed: u64) -> Self {
        GenConfig { grid_cols, range_m, n_puzzles, seed, rule_weights: [1.0; RULE_COUNT] }
    }

    pub fn with_rule_weights(mut self, weights: [f64; RULE_COUNT]) -> Self {
        self.rule_weights = weights;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.grid_cols != 3 && self.grid_cols != 10 {
            return Err(GenError::Config(format!("grid_cols must be 3 or 10, got {}", self.grid_cols)));
        }
        if !matches!(self.range_m, 10 | 100 | 1000) {
            return Err(GenError::Config(format!("range_m must be 10, 100 or 1000, got {}", self.range_m)));
        }
        if self.n_puzzles == 0 {
            return Err(GenError::Config("n_puzzles must be at least 1".into()));
        }
        if self.rule_weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(GenError::Config("rule weights must be finite and non-negative".into()));
        }
        if self.rule_weights.iter().all(|&w| w == 0.0) {
            return Err(GenError::Config("at least one rule weight must be positive".into()));
        }
        Ok(())
    }
}

/// The three complete rows of one attribute, including the hidden cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrGrid {
    pub rows: [Vec<u32>; 3],
}

impl AttrGrid {
    /// The value of the hidden cell (3, g).
    pub fn answer(&self) -> u32 {
        *self.rows[2].last().unwrap()
    }
}

/// Draw one rule per attribute from the feasible, positively-weighted set.
pub fn sample_rules(cfg: &GenConfig, rng: &mut impl Rng) -> Result<[RuleKind; TRUE_ATTRS], GenError> {
    cfg.validate()?;
    let feasible: Vec<(RuleKind, f64)> = RuleKind::ALL
        .iter()
        .map(|&r| (r, cfg.rule_weights[r.index()]))
        .filter(|&(r, w)| w > 0.0 && r.feasible(cfg.grid_cols, cfg.range_m))
        .collect();
    let total: f64 = feasible.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return Err(GenError::NoFeasibleRule { grid_cols: cfg.grid_cols, range_m: cfg.range_m });
    }
    let mut pick = || {
        let mut u = rng.random_range(0.0..total);
        for &(r, w) in &feasible {
            if u < w {
                return r;
            }
            u -= w;
        }
        feasible.last().unwrap().0
    };
    Ok([pick(), pick(), pick()])
}

/// Split `total` into `parts` values, each at least 1, uniformly over the
/// compositions (stars and bars over random cut points).
fn sample_composition(total: u32, parts: usize, rng: &mut impl Rng) -> Vec<u32> {
    debug_assert!(total as usize >= parts && parts >= 1);
    if parts == 1 {
        return vec![total];
    }
    let mut cuts: Vec<u32> = rand::seq::index::sample(rng, (total - 1) as usize, parts - 1)
        .iter()
        .map(|i| i as u32 + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// Generate one row satisfying `rule` exactly, all values in `[0, m-1]`.
///
/// Arithmetic rows sample their operand panels from `[1, m-1]` (a zero
/// operand would let a sum row double as a difference row) and the final
/// panel is the implied sum or difference. Distribute rows are `g` distinct
/// values; the cross-row rotation is applied by [`generate_grid`].
pub fn generate_row(
    rule: RuleKind,
    grid_cols: u32,
    range_m: u32,
    rng: &mut impl Rng,
) -> Result<Vec<u32>, GenError> {
    if !rule.feasible(grid_cols, range_m) {
        return Err(RuleError::Infeasible { rule, grid_cols, range_m }.into());
    }
    let g = grid_cols as usize;
    let m = range_m;
    let row = match rule {
        RuleKind::Constant => {
            let v = rng.random_range(0..m);
            vec![v; g]
        }
        RuleKind::ArithPlus => {
            // final value = sum of the g-1 leading panels
            let target = rng.random_range(g as u32 - 1..m);
            let mut row = sample_composition(target, g - 1, rng);
            row.push(target);
            row
        }
        RuleKind::ArithMinus => {
            // final value = first panel minus the sum of the rest
            let subtrahend = rng.random_range(g as u32 - 2..m);
            let minuend = rng.random_range(subtrahend..m);
            let mut row = vec![minuend];
            row.extend(sample_composition(subtrahend, g - 2, rng));
            row.push(minuend - subtrahend);
            row
        }
        RuleKind::ProgPlus1 | RuleKind::ProgMinus1 | RuleKind::ProgPlus2 | RuleKind::ProgMinus2 => {
            let c = rule.prog_step().unwrap();
            let span = (c.unsigned_abs() as u32) * (g as u32 - 1);
            let start = if c > 0 {
                rng.random_range(0..m - span)
            } else {
                rng.random_range(span..m)
            };
            (0..g as i64).map(|i| (start as i64 + c * i) as u32).collect()
        }
        RuleKind::DistShiftLeft | RuleKind::DistShiftRight => {
            rand::seq::index::sample(rng, m as usize, g)
                .iter()
                .map(|v| v as u32)
                .collect()
        }
    };
    debug_assert!(rules::row_satisfies(rule, &row));
    debug_assert!(row.iter().all(|&v| v < m));
    Ok(row)
}

/// Generate the three complete rows of every attribute.
pub fn generate_grid(
    attr_rules: [RuleKind; TRUE_ATTRS],
    grid_cols: u32,
    range_m: u32,
    rng: &mut impl Rng,
) -> Result<[AttrGrid; TRUE_ATTRS], GenError> {
    let mut grids = Vec::with_capacity(TRUE_ATTRS);
    for rule in attr_rules {
        let rows = match rule.shift_dir() {
            Some(dir) => {
                let row1 = generate_row(rule, grid_cols, range_m, rng)?;
                let row2 = rules::rotate(&row1, dir);
                let row3 = rules::rotate(&row2, dir);
                [row1, row2, row3]
            }
            None => [
                generate_row(rule, grid_cols, range_m, rng)?,
                generate_row(rule, grid_cols, range_m, rng)?,
                generate_row(rule, grid_cols, range_m, rng)?,
            ],
        };
        grids.push(AttrGrid { rows });
    }
    Ok(grids.try_into().unwrap())
}

/// Sample an alternative value for one attribute: in range, different from
/// the correct value, and completing no rule that fits the visible context.
fn sample_alternative(
    grid: &AttrGrid,
    range_m: u32,
    rng: &mut impl Rng,
) -> Result<u32, GenError> {
    let g = grid.rows[0].len();
    let row3_ctx = &grid.rows[2][..g - 1];
    let mut excluded: Vec<u32> = vec![grid.answer()];
    for rule in RuleKind::ALL {
        if rules::fits_rows_1_2(rule, &grid.rows[0], &grid.rows[1]) {
            if let Some(v) = rules::completion(rule, &grid.rows[0], row3_ctx, range_m) {
                excluded.push(v);
            }
        }
    }
    for _ in 0..MAX_ATTEMPTS {
        let v = rng.random_range(0..range_m);
        if !excluded.contains(&v) {
            return Ok(v);
        }
    }
    Err(GenError::RetryExhausted)
}

/// Build the 8-candidate answer set: the Cartesian product of
/// {correct, alternative} over the three attributes, shuffled so the correct
/// tuple lands at a uniform index.
pub fn build_candidates(
    grids: &[AttrGrid; TRUE_ATTRS],
    range_m: u32,
    rng: &mut impl Rng,
) -> Result<(Vec<[u32; TRUE_ATTRS]>, u8), GenError> {
    let correct = [grids[0].answer(), grids[1].answer(), grids[2].answer()];
    let mut alts = [0u32; TRUE_ATTRS];
    for attr in 0..TRUE_ATTRS {
        alts[attr] = sample_alternative(&grids[attr], range_m, rng)?;
    }
    let mut combos: Vec<(usize, [u32; TRUE_ATTRS])> = (0..CANDIDATES)
        .map(|mask| {
            let mut tuple = correct;
            for (attr, value) in tuple.iter_mut().enumerate() {
                if mask & (1 << attr) != 0 {
                    *value = alts[attr];
                }
            }
            (mask, tuple)
        })
        .collect();
    combos.shuffle(rng);
    let answer_index = combos.iter().position(|&(mask, _)| mask == 0).unwrap() as u8;
    Ok((combos.into_iter().map(|(_, t)| t).collect(), answer_index))
}

/// Generate the puzzle at `index` of the configured dataset.
pub fn generate_puzzle(cfg: &GenConfig, index: u64) -> Result<Puzzle, GenError> {
    cfg.validate()?;
    let seed = mix_seed(cfg.seed, index);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let rules = sample_rules(cfg, &mut rng)?;
    let grids = generate_grid(rules, cfg.grid_cols, cfg.range_m, &mut rng)?;
    let (tuples, answer_index) = build_candidates(&grids, cfg.range_m, &mut rng)?;

    let g = cfg.grid_cols as usize;
    let mut context = Vec::with_capacity(3 * g - 1);
    for row in 0..3 {
        let cols = if row == 2 { g - 1 } else { g };
        for col in 0..cols {
            let values = [
                grids[0].rows[row][col],
                grids[1].rows[row][col],
                grids[2].rows[row][col],
            ];
            context.push(Panel::degenerate(values, cfg.range_m));
        }
    }
    let candidates = tuples
        .into_iter()
        .map(|t| Panel::degenerate(t, cfg.range_m))
        .collect();
    Ok(Puzzle::new(
        cfg.grid_cols,
        cfg.range_m,
        seed,
        0,
        rules,
        answer_index,
        context,
        candidates,
    )?)
}

/// Stream the configured dataset. Equal configs yield identical puzzles,
/// byte for byte, independent of how the work is sharded.
pub fn generate_dataset(cfg: &GenConfig) -> impl Iterator<Item = Result<Puzzle, GenError>> + '_ {
    (0..cfg.n_puzzles).map(move |i| generate_puzzle(cfg, i))
}
