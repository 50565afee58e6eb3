//! Arithmetic on sparse mass functions with signed integer support.
//!
//! Rule fitting and panel prediction combine PMFs through sums, differences
//! and shifts of independent variables. Intermediate results can leave
//! `[0, m-1]` (a sum of nine panel values, say), so this module works over
//! `i64` support and only at the end truncates back into a [`SparsePmf`].

use std::collections::BTreeMap;

use crate::pmf::SparsePmf;

/// An unnormalized mass function on signed integers. Only strictly positive
/// masses are stored; the total may be any non-negative number.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFn {
    masses: BTreeMap<i64, f64>,
}

impl MassFn {
    pub fn from_pmf(pmf: &SparsePmf) -> Self {
        MassFn {
            masses: pmf.entries().iter().map(|&(v, p)| (v as i64, p)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn mass(&self, v: i64) -> f64 {
        self.masses.get(&v).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses.iter().map(|(&v, &m)| (v, m))
    }

    /// Distribution of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &MassFn) -> MassFn {
        let mut out = BTreeMap::new();
        for (&x, &px) in &self.masses {
            for (&y, &py) in &other.masses {
                *out.entry(x + y).or_insert(0.0) += px * py;
            }
        }
        MassFn { masses: out }
    }

    /// Distribution of `X - Y` for independent `X ~ self`, `Y ~ other`.
    pub fn cross_correlate(&self, other: &MassFn) -> MassFn {
        let mut out = BTreeMap::new();
        for (&x, &px) in &self.masses {
            for (&y, &py) in &other.masses {
                *out.entry(x - y).or_insert(0.0) += px * py;
            }
        }
        MassFn { masses: out }
    }

    /// Translate the support by `c`.
    pub fn shift(&self, c: i64) -> MassFn {
        MassFn {
            masses: self.masses.iter().map(|(&v, &m)| (v + c, m)).collect(),
        }
    }

    /// Pointwise product; support shrinks to the intersection.
    pub fn pointwise_mul(&self, other: &MassFn) -> MassFn {
        let mut out = BTreeMap::new();
        for (&v, &m) in &self.masses {
            let o = other.mass(v);
            if o > 0.0 {
                out.insert(v, m * o);
            }
        }
        MassFn { masses: out }
    }

    /// Agreement `Σ_v mass(v)·pmf(v)` against an in-range PMF.
    pub fn inner_pmf(&self, pmf: &SparsePmf) -> f64 {
        pmf.entries()
            .iter()
            .map(|&(v, p)| self.mass(v as i64) * p)
            .sum()
    }

    /// Truncate to `[0, range_m)` and renormalize. `None` when no mass
    /// survives the truncation.
    pub fn into_pmf_in_range(self, range_m: u32) -> Option<SparsePmf> {
        let weights: Vec<(u32, f64)> = self
            .masses
            .into_iter()
            .filter(|&(v, _)| v >= 0 && v < range_m as i64)
            .map(|(v, m)| (v as u32, m))
            .collect();
        SparsePmf::from_weights(weights, range_m)
    }
}

/// Convolve a sequence of PMFs: the distribution of their sum.
pub fn convolve_pmfs<'a>(pmfs: impl IntoIterator<Item = &'a SparsePmf>) -> Option<MassFn> {
    let mut iter = pmfs.into_iter();
    let first = MassFn::from_pmf(iter.next()?);
    Some(iter.fold(first, |acc, p| acc.convolve(&MassFn::from_pmf(p))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(entries: &[(u32, f64)], m: u32) -> SparsePmf {
        SparsePmf::from_entries(entries.to_vec(), m).unwrap()
    }

    #[test]
    fn convolution_of_degenerates_is_degenerate_sum() {
        let a = MassFn::from_pmf(&pmf(&[(3, 1.0)], 10));
        let b = MassFn::from_pmf(&pmf(&[(4, 1.0)], 10));
        let c = a.convolve(&b);
        assert_eq!(c.mass(7), 1.0);
        assert_eq!(c.iter().count(), 1);
    }

    #[test]
    fn cross_correlation_is_difference() {
        let a = MassFn::from_pmf(&pmf(&[(2, 0.5), (5, 0.5)], 10));
        let b = MassFn::from_pmf(&pmf(&[(3, 1.0)], 10));
        let d = a.cross_correlate(&b);
        assert_eq!(d.mass(-1), 0.5);
        assert_eq!(d.mass(2), 0.5);
    }

    #[test]
    fn truncation_drops_out_of_range_and_renormalizes() {
        let a = MassFn::from_pmf(&pmf(&[(8, 0.5), (9, 0.5)], 10));
        let b = MassFn::from_pmf(&pmf(&[(0, 0.5), (3, 0.5)], 10));
        // sums: 8 (.25), 9 (.25), 11 (.25), 12 (.25) -> keep 8, 9
        let p = a.convolve(&b).into_pmf_in_range(10).unwrap();
        assert_eq!(p.entries(), &[(8, 0.5), (9, 0.5)]);
    }

    #[test]
    fn empty_after_truncation() {
        let a = MassFn::from_pmf(&pmf(&[(9, 1.0)], 10));
        let sum = a.convolve(&a); // all mass at 18
        assert!(sum.into_pmf_in_range(10).is_none());
    }
}
