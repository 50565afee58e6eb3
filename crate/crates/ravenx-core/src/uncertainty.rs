//! Simulated perceptual uncertainty.
//!
//! Two independent corruptions turn an oracle-perception puzzle into a noisy
//! one: confounding attributes (uniform random values carrying no signal,
//! lowering the attribute-level SNR) and smoothing of the degenerate value
//! distributions, either with a three-bin scheme or a discretized Gaussian.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::pmf::SparsePmf;
use crate::puzzle::{Puzzle, TRUE_ATTRS};
use crate::seed::mix_seed;

/// Mass below which discretized Gaussian entries are truncated.
const GAUSSIAN_TRUNCATION: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum UncertaintyError {
    #[error("p_l must be in (0.5, 1], got {0}")]
    BadPl(f64),
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("smoothing requires a degenerate input pmf")]
    NotDegenerate,
    #[error("puzzle is already uncertain; apply_uncertainty expects a clean puzzle")]
    AlreadyUncertain,
    #[error("range {0} too small for three-bin smoothing")]
    RangeTooSmall(u32),
}

/// How to spread each degenerate attribute distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    None,
    /// Three bins: `p(T) ~ U(p_l, 1)` on the true value, the remainder split
    /// between its two neighbors.
    Bins { p_l: f64 },
    /// Discretized Gaussian of width `sigma` centered on the true value.
    Gaussian { sigma: f64 },
}

/// Full corruption settings for a dataset pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyConfig {
    pub n_confounders: u32,
    pub smoothing: Smoothing,
    /// Whether smoothing also applies to confounder attributes.
    pub smooth_confounders: bool,
    pub seed: u64,
}

impl UncertaintyConfig {
    pub fn new(n_confounders: u32, smoothing: Smoothing, seed: u64) -> Self {
        UncertaintyConfig { n_confounders, smoothing, smooth_confounders: true, seed }
    }

    pub fn validate(&self) -> Result<(), UncertaintyError> {
        match self.smoothing {
            Smoothing::Bins { p_l } if !(p_l > 0.5 && p_l <= 1.0) => Err(UncertaintyError::BadPl(p_l)),
            Smoothing::Gaussian { sigma } if !(sigma > 0.0) => Err(UncertaintyError::BadSigma(sigma)),
            _ => Ok(()),
        }
    }
}

/// Attribute-level signal-to-noise ratio in dB: `10·log10(3/k)` for `k`
/// confounders against the three true attributes; infinite when `k = 0`.
pub fn snr_db(n_confounders: u32) -> f64 {
    if n_confounders == 0 {
        f64::INFINITY
    } else {
        10.0 * (TRUE_ATTRS as f64 / n_confounders as f64).log10()
    }
}

/// Add `k` confounder attributes to every context panel and candidate, each
/// an independent uniform draw over `[0, m-1]`. True attributes and existing
/// confounders are untouched.
pub fn inject_confounders(p: &Puzzle, k: u32, rng: &mut impl Rng) -> Puzzle {
    if k == 0 {
        return p.clone();
    }
    let m = p.range_m();
    let out = p
        .map_panels(|panel| {
            let mut panel = panel.clone();
            for _ in 0..k {
                let v = rng.random_range(0..m);
                panel.push_confounder(SparsePmf::degenerate(v, m).expect("in range"));
            }
            Ok::<_, std::convert::Infallible>(panel)
        })
        .unwrap_or_else(|e| match e {});
    out.with_confounder_count(p.n_confounders() + k)
}

/// Three-bin smoothing of a degenerate PMF at true value `T`:
/// `p(T) ~ U(p_l, 1)`, `p(N1) ~ U(0, 1 - p(T))`, `p(N2)` the remainder.
/// Neighbors are `T±1`; at the range boundary the pair folds inward
/// (`{T+1, T+2}` at 0, `{T-1, T-2}` at `m-1`) so the support stays in range
/// and the argmax stays at `T`.
pub fn smooth_bins(
    pmf: &SparsePmf,
    p_l: f64,
    rng: &mut impl Rng,
) -> Result<SparsePmf, UncertaintyError> {
    if !(p_l > 0.5 && p_l <= 1.0) {
        return Err(UncertaintyError::BadPl(p_l));
    }
    if !pmf.is_degenerate() {
        return Err(UncertaintyError::NotDegenerate);
    }
    let m = pmf.range_m();
    if m < 3 {
        return Err(UncertaintyError::RangeTooSmall(m));
    }
    if p_l >= 1.0 {
        return Ok(pmf.clone());
    }
    let t = pmf.mode();
    let (n1, n2) = if t == 0 {
        (1, 2)
    } else if t == m - 1 {
        (t - 1, t - 2)
    } else {
        (t - 1, t + 1)
    };
    let p_t = rng.random_range(p_l..1.0);
    let p_n1 = rng.random_range(0.0..1.0 - p_t);
    let p_n2 = 1.0 - p_t - p_n1;
    let entries = [(t, p_t), (n1, p_n1), (n2, p_n2)]
        .into_iter()
        .filter(|&(_, p)| p > 0.0)
        .collect();
    Ok(SparsePmf::from_entries(entries, m).expect("bins construction is normalized"))
}

/// Gaussian smoothing of a degenerate PMF: weights `exp(-(x-T)²/(2σ²))` at
/// the integer offsets, truncated below [`GAUSSIAN_TRUNCATION`] and
/// renormalized over `[0, m-1]`.
pub fn smooth_gaussian(pmf: &SparsePmf, sigma: f64) -> Result<SparsePmf, UncertaintyError> {
    if !(sigma > 0.0) {
        return Err(UncertaintyError::BadSigma(sigma));
    }
    if !pmf.is_degenerate() {
        return Err(UncertaintyError::NotDegenerate);
    }
    let m = pmf.range_m();
    let t = pmf.mode() as i64;
    // beyond this offset the relative weight is under the truncation level
    let max_offset = (sigma * (-2.0 * GAUSSIAN_TRUNCATION.ln()).sqrt()).ceil() as i64 + 1;
    let mut weights = Vec::new();
    for x in (t - max_offset).max(0)..=(t + max_offset).min(m as i64 - 1) {
        let d = (x - t) as f64;
        let w = (-d * d / (2.0 * sigma * sigma)).exp();
        weights.push((x as u32, w));
    }
    let total: f64 = weights.iter().map(|&(_, w)| w).sum();
    let kept: Vec<(u32, f64)> = weights
        .into_iter()
        .filter(|&(_, w)| w / total >= GAUSSIAN_TRUNCATION)
        .collect();
    Ok(SparsePmf::from_weights(kept, m).expect("center weight is always positive"))
}

/// Corrupt a clean puzzle: inject confounders, then smooth every PMF in the
/// context and the candidates. Deterministic given the puzzle and config;
/// the rng stream is derived from `(cfg.seed, puzzle.seed)` so datasets can
/// be corrupted in parallel.
pub fn apply_uncertainty(p: &Puzzle, cfg: &UncertaintyConfig) -> Result<Puzzle, UncertaintyError> {
    cfg.validate()?;
    if !p.is_clean() {
        return Err(UncertaintyError::AlreadyUncertain);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(cfg.seed, p.seed()));
    let with_confounders = inject_confounders(p, cfg.n_confounders, &mut rng);
    match cfg.smoothing {
        Smoothing::None => Ok(with_confounders),
        Smoothing::Bins { p_l } => with_confounders.map_panels(|panel| {
            panel.map_attrs(|pmf, is_confounder| {
                if is_confounder && !cfg.smooth_confounders {
                    Ok(pmf.clone())
                } else {
                    smooth_bins(pmf, p_l, &mut rng)
                }
            })
        }),
        Smoothing::Gaussian { sigma } => with_confounders.map_panels(|panel| {
            panel.map_attrs(|pmf, is_confounder| {
                if is_confounder && !cfg.smooth_confounders {
                    Ok(pmf.clone())
                } else {
                    smooth_gaussian(pmf, sigma)
                }
            })
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture_3x3;
    use crate::generator::{generate_puzzle, GenConfig};

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn snr_table() {
        assert!((snr_db(1) - 4.77).abs() < 0.01);
        assert_eq!(snr_db(3), 0.0);
        assert!((snr_db(300) - -20.0).abs() < 0.01);
        assert!(snr_db(0).is_infinite());
    }

    #[test]
    fn zero_confounders_is_identity() {
        let p = fixture_3x3();
        let cfg = UncertaintyConfig::new(0, Smoothing::None, 7);
        assert_eq!(apply_uncertainty(&p, &cfg).unwrap(), p);
    }

    #[test]
    fn confounders_leave_true_attrs_untouched() {
        let p = generate_puzzle(&GenConfig::new(10, 1000, 1, 5), 0).unwrap();
        let q = inject_confounders(&p, 10, &mut rng(0));
        assert_eq!(q.n_confounders(), 10);
        for (a, b) in p.panels().zip(q.panels()) {
            assert_eq!(a.true_attrs(), b.true_attrs());
            assert_eq!(b.confounders().len(), 10);
        }
    }

    #[test]
    fn bins_at_pl_one_is_identity() {
        let pmf = SparsePmf::degenerate(5, 10).unwrap();
        let out = smooth_bins(&pmf, 1.0, &mut rng(1)).unwrap();
        assert_eq!(out, pmf);
    }

    #[test]
    fn bins_keep_argmax_and_normalization() {
        let mut r = rng(2);
        for t in [0u32, 1, 5, 999] {
            let pmf = SparsePmf::degenerate(t, 1000).unwrap();
            for _ in 0..50 {
                let out = smooth_bins(&pmf, 0.51, &mut r).unwrap();
                assert_eq!(out.mode(), t);
                assert!((out.total() - 1.0).abs() < 1e-9);
                assert!(out.prob(t) >= 0.51);
                assert!(out.support_len() <= 3);
            }
        }
    }

    #[test]
    fn bins_boundary_folds_inward() {
        let mut r = rng(3);
        let low = smooth_bins(&SparsePmf::degenerate(0, 10).unwrap(), 0.51, &mut r).unwrap();
        assert!(low.entries().iter().all(|&(v, _)| v <= 2));
        let high = smooth_bins(&SparsePmf::degenerate(9, 10).unwrap(), 0.51, &mut r).unwrap();
        assert!(high.entries().iter().all(|&(v, _)| v >= 7));
    }

    #[test]
    fn gaussian_limit_cases() {
        let pmf = SparsePmf::degenerate(500, 1000).unwrap();
        // near-zero sigma collapses to the true value
        let tight = smooth_gaussian(&pmf, 1e-6).unwrap();
        assert!(tight.is_degenerate());
        assert_eq!(tight.mode(), 500);
        // interior smoothing is symmetric
        let wide = smooth_gaussian(&pmf, 0.5).unwrap();
        assert!((wide.prob(499) - wide.prob(501)).abs() < 1e-12);
        assert_eq!(wide.mode(), 500);
    }

    #[test]
    fn gaussian_ratio_matches_closed_form() {
        for sigma in [0.3, 0.5, 0.7] {
            let pmf = SparsePmf::degenerate(500, 1000).unwrap();
            let out = smooth_gaussian(&pmf, sigma).unwrap();
            let ratio = out.prob(500) / out.prob(501);
            let expected = (1.0 / (2.0 * sigma * sigma)).exp();
            assert!((ratio - expected).abs() < 1e-9 * expected, "sigma {sigma}");
        }
    }

    #[test]
    fn apply_is_deterministic_and_rejects_noisy_input() {
        let p = generate_puzzle(&GenConfig::new(3, 10, 1, 11), 0).unwrap();
        let cfg = UncertaintyConfig::new(2, Smoothing::Bins { p_l: 0.7 }, 13);
        let a = apply_uncertainty(&p, &cfg).unwrap();
        let b = apply_uncertainty(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            apply_uncertainty(&a, &cfg).unwrap_err(),
            UncertaintyError::AlreadyUncertain
        );
    }
}
