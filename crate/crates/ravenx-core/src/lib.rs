//! Symbolic matrix-reasoning puzzles under simulated perceptual uncertainty,
//! and a probabilistic abductive solver for them.
//!
//! The crate covers the full pipeline short of talking to an external model:
//!
//! - [`generator`] builds seeded, bitwise-reproducible 3×3 and 3×10 datasets
//!   in the center constellation with unbiased 8-candidate answer sets;
//! - [`uncertainty`] corrupts clean datasets with confounding attributes and
//!   smoothed value distributions, and computes the attribute-level SNR;
//! - [`solver`] abduces per-attribute rule confidences, predicts the missing
//!   panel and scores candidates with entropy-regularized weighting;
//! - [`train`] learns shared rule priors under the entropy-weighted loss;
//! - [`metrics`] aggregates task and arithmetic accuracy into reports;
//! - [`jsonl`] fixes the on-disk dataset format.
//!
//! The companion guide in `book/` walks through each of these with runnable
//! examples; the `ravenx` CLI exposes them as subcommands.

pub mod dist;
pub mod fixtures;
pub mod generator;
pub mod jsonl;
pub mod metrics;
pub mod pmf;
pub mod puzzle;
pub mod record;
pub mod rules;
pub mod seed;
pub mod solver;
pub mod train;
pub mod uncertainty;

pub use pmf::SparsePmf;
pub use puzzle::{validate_puzzle, Panel, Puzzle};
pub use record::EvalRecord;
pub use rules::RuleKind;
