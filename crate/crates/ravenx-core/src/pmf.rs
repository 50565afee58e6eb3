//! Sparse probability mass functions over integer attribute values.
//!
//! Every attribute of a panel is a [`SparsePmf`] over `[0, m-1]` where `m` is
//! the puzzle's dynamic range. Clean (oracle-perception) puzzles use
//! single-entry PMFs; uncertainty injection spreads them out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the normalization invariant.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PmfError {
    #[error("pmf has no entries")]
    Empty,
    #[error("pmf probabilities sum to {sum}, expected 1 within {NORM_TOL}")]
    NotNormalized { sum: f64 },
    #[error("value {value} outside range [0, {range_m})")]
    ValueOutOfRange { value: u32, range_m: u32 },
    #[error("duplicate value {value}")]
    DuplicateValue { value: u32 },
    #[error("entry ({value}, {prob}) has non-positive probability")]
    NonPositiveProb { value: u32, prob: f64 },
    #[error("range must be at least 1")]
    BadRange,
}

/// A discrete probability mass function with sparse support on `[0, range_m)`.
///
/// Invariants, enforced at construction:
/// - probabilities sum to 1 within [`NORM_TOL`],
/// - values are distinct and in range,
/// - entries with non-positive probability are never stored.
///
/// Entries are kept sorted by value, so equal PMFs compare and serialize
/// identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf", into = "RawPmf")]
pub struct SparsePmf {
    entries: Vec<(u32, f64)>,
    range_m: u32,
}

/// Wire form: bare entry list plus range, revalidated on deserialize.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPmf {
    entries: Vec<(u32, f64)>,
    range_m: u32,
}

impl From<SparsePmf> for RawPmf {
    fn from(p: SparsePmf) -> RawPmf {
        RawPmf { entries: p.entries, range_m: p.range_m }
    }
}

impl TryFrom<RawPmf> for SparsePmf {
    type Error = PmfError;
    fn try_from(raw: RawPmf) -> Result<SparsePmf, PmfError> {
        SparsePmf::from_entries(raw.entries, raw.range_m)
    }
}

impl SparsePmf {
    /// A PMF with all mass on `value`.
    pub fn degenerate(value: u32, range_m: u32) -> Result<Self, PmfError> {
        Self::from_entries(vec![(value, 1.0)], range_m)
    }

    /// Build from `(value, prob)` pairs, validating all invariants.
    pub fn from_entries(mut entries: Vec<(u32, f64)>, range_m: u32) -> Result<Self, PmfError> {
        if range_m == 0 {
            return Err(PmfError::BadRange);
        }
        if entries.is_empty() {
            return Err(PmfError::Empty);
        }
        entries.sort_by_key(|&(v, _)| v);
        let mut sum = 0.0;
        for i in 0..entries.len() {
            let (v, p) = entries[i];
            if v >= range_m {
                return Err(PmfError::ValueOutOfRange { value: v, range_m });
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(PmfError::NonPositiveProb { value: v, prob: p });
            }
            if i > 0 && entries[i - 1].0 == v {
                return Err(PmfError::DuplicateValue { value: v });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(PmfError::NotNormalized { sum });
        }
        Ok(SparsePmf { entries, range_m })
    }

    /// Build from possibly-unnormalized weights: drops non-positive ones,
    /// merges duplicate values, rescales to total mass 1. Returns `None` if
    /// no mass remains.
    pub fn from_weights(weights: Vec<(u32, f64)>, range_m: u32) -> Option<Self> {
        let mut sorted: Vec<(u32, f64)> =
            weights.into_iter().filter(|&(v, w)| w > 0.0 && v < range_m).collect();
        sorted.sort_by_key(|&(v, _)| v);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(sorted.len());
        for (v, w) in sorted {
            match entries.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => entries.push((v, w)),
            }
        }
        let total: f64 = entries.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 || !total.is_finite() {
            return None;
        }
        for e in &mut entries {
            e.1 /= total;
        }
        Some(SparsePmf { entries, range_m })
    }

    /// The uniform PMF over the whole range.
    pub fn uniform(range_m: u32) -> Self {
        let p = 1.0 / range_m as f64;
        SparsePmf { entries: (0..range_m).map(|v| (v, p)).collect(), range_m }
    }

    pub fn range_m(&self) -> u32 {
        self.range_m
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Probability of `value` (0 when outside the support).
    pub fn prob(&self, value: u32) -> f64 {
        match self.entries.binary_search_by_key(&value, |&(v, _)| v) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    /// True when all mass sits on a single value.
    pub fn is_degenerate(&self) -> bool {
        self.entries.len() == 1
    }

    /// The modal value: highest probability, lowest value on ties.
    pub fn mode(&self) -> u32 {
        let mut best = self.entries[0];
        for &(v, p) in &self.entries[1..] {
            if p > best.1 {
                best = (v, p);
            }
        }
        best.0
    }

    /// Inner product `Σ_v p(v)·q(v)`, the agreement between two PMFs.
    pub fn inner(&self, other: &SparsePmf) -> f64 {
        // merge-walk both sorted supports
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (va, pa) = self.entries[i];
            let (vb, pb) = other.entries[j];
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += pa * pb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }
}
