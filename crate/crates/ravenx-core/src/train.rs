//! Trainable rule priors under the entropy-weighted loss.
//!
//! The solver's confidence is `s_r = fit_r · softmax(w)_r`; this module
//! learns the shared priors `w` by gradient descent on
//! `L = mean_puzzle Σ_attr L_attr / H(s_attr)` where `L_attr` is the
//! cross-entropy of the temperature-softmaxed candidate scores at the true
//! answer. Both the numerator and the entropy depend on `w`, and the
//! analytic gradient carries both paths (checked against central finite
//! differences in the test suite).

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::puzzle::{Puzzle, CANDIDATES, TRUE_ATTRS};
use crate::rules::{RuleKind, RULE_COUNT};
use crate::solver::{agreement_matrix, rule_fit, softmax, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("loss diverged to a non-finite value at epoch {0}")]
    Diverged(u32),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: usize,
    /// Softmax temperature over candidate scores.
    pub temperature: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.1, epochs: 50, batch_size: 16, temperature: 0.1, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(TrainError::Config("learning_rate must be non-negative".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(TrainError::Config("temperature must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trained priors plus per-epoch traces of the loss and the softmaxed
/// priors (index 0 is the pre-training state).
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub priors: [f64; RULE_COUNT],
    pub loss_trace: Vec<f64>,
    pub prior_trace: Vec<[f64; RULE_COUNT]>,
}

/// Everything about one attribute that the loss needs and that does not
/// depend on `w`: the rule fits and the prediction/candidate agreements.
#[derive(Debug, Clone)]
pub struct AttrFeatures {
    pub fits: [f64; RULE_COUNT],
    pub agreement: [[f64; RULE_COUNT]; CANDIDATES],
}

#[derive(Debug, Clone)]
pub struct PuzzleFeatures {
    pub attrs: Vec<AttrFeatures>,
    pub answer: usize,
}

/// Precompute the w-independent parts of the loss for a dataset.
pub fn precompute_features(
    puzzles: &[Puzzle],
    cfg: &SolverConfig,
) -> Result<Vec<PuzzleFeatures>, SolverError> {
    puzzles
        .iter()
        .map(|p| {
            let n_attrs = if cfg.include_confounders { p.attr_count() } else { TRUE_ATTRS };
            let attrs = (0..n_attrs)
                .map(|attr| {
                    let row1 = p.attr_row(0, attr);
                    let row2 = p.attr_row(1, attr);
                    let mut fits = [0.0; RULE_COUNT];
                    for rule in RuleKind::ALL {
                        fits[rule.index()] = rule_fit(rule, &row1, &row2)?;
                    }
                    Ok(AttrFeatures { fits, agreement: agreement_matrix(p, attr) })
                })
                .collect::<Result<Vec<_>, SolverError>>()?;
            Ok(PuzzleFeatures { attrs, answer: p.answer_index() as usize })
        })
        .collect()
}

/// Mean entropy-weighted loss and its gradient in `w` over a feature batch.
pub fn loss_and_gradient(
    batch: &[&PuzzleFeatures],
    w: &[f64; RULE_COUNT],
    cfg: &SolverConfig,
    temperature: f64,
) -> (f64, [f64; RULE_COUNT]) {
    let q = softmax(w);
    let mut loss = 0.0;
    let mut grad = [0.0; RULE_COUNT];
    for puzzle in batch {
        for attr in &puzzle.attrs {
            attr_loss_grad(attr, puzzle.answer, &q, cfg, temperature, &mut loss, &mut grad);
        }
    }
    let n = batch.len().max(1) as f64;
    for g in &mut grad {
        *g /= n;
    }
    (loss / n, grad)
}

#[allow(clippy::needless_range_loop)]
fn attr_loss_grad(
    attr: &AttrFeatures,
    answer: usize,
    q: &[f64; RULE_COUNT],
    cfg: &SolverConfig,
    temperature: f64,
    loss: &mut f64,
    grad: &mut [f64; RULE_COUNT],
) {
    // forward pass
    let mut s = [0.0; RULE_COUNT];
    let mut s_total = 0.0;
    for r in 0..RULE_COUNT {
        s[r] = attr.fits[r] * q[r];
        s_total += s[r];
    }
    let z: f64 = s_total + RULE_COUNT as f64 * cfg.epsilon;
    let mut s_hat = [0.0; RULE_COUNT];
    for r in 0..RULE_COUNT {
        s_hat[r] = (s[r] + cfg.epsilon) / z;
    }
    let entropy: f64 = s_hat.iter().map(|&p| -p * p.ln()).sum();
    let clamped = entropy < cfg.entropy_floor;
    let h = if clamped { cfg.entropy_floor } else { entropy };

    let mut scores = [0.0; CANDIDATES];
    for c in 0..CANDIDATES {
        for r in 0..RULE_COUNT {
            scores[c] += s_hat[r] * attr.agreement[c][r];
        }
    }
    let max_score = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| ((s - max_score) / temperature).exp()).collect();
    let exp_total: f64 = exps.iter().sum();
    let p_answer = exps[answer] / exp_total;
    let l_attr = -p_answer.ln();
    *loss += l_attr / h;

    // backward pass: dŝ_r/dw_j, then chain into L_attr and H
    for j in 0..RULE_COUNT {
        let dz = s[j] - q[j] * s_total;
        let mut dl = 0.0;
        let mut dh = 0.0;
        let mut ds_hat = [0.0; RULE_COUNT];
        for r in 0..RULE_COUNT {
            let ds = s[r] * (if r == j { 1.0 - q[j] } else { -q[j] });
            ds_hat[r] = (ds - s_hat[r] * dz) / z;
            dh -= (1.0 + s_hat[r].ln()) * ds_hat[r];
        }
        for c in 0..CANDIDATES {
            let p_c = exps[c] / exp_total;
            let indicator = if c == answer { 1.0 } else { 0.0 };
            let d_score: f64 = (0..RULE_COUNT).map(|r| attr.agreement[c][r] * ds_hat[r]).sum();
            dl += (p_c - indicator) / temperature * d_score;
        }
        let dh_clamped = if clamped { 0.0 } else { dh };
        grad[j] += dl / h - l_attr * dh_clamped / (h * h);
    }
}

/// Gradient descent on the rule priors. Returns the learned `w` and the
/// full-dataset loss after every epoch (index 0 is the pre-training loss).
pub fn train_rule_priors(
    puzzles: &[Puzzle],
    tcfg: &TrainConfig,
    cfg: &SolverConfig,
) -> Result<TrainReport, TrainError> {
    tcfg.validate()?;
    let features = precompute_features(puzzles, cfg)?;
    let all: Vec<&PuzzleFeatures> = features.iter().collect();
    let mut w = cfg.rule_priors;
    let mut rng = ChaCha12Rng::seed_from_u64(tcfg.seed);
    let mut loss_trace = vec![loss_and_gradient(&all, &w, cfg, tcfg.temperature).0];
    let mut prior_trace = vec![softmax(&w)];

    let mut order: Vec<usize> = (0..features.len()).collect();
    for epoch in 0..tcfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(tcfg.batch_size) {
            let batch: Vec<&PuzzleFeatures> = chunk.iter().map(|&i| &features[i]).collect();
            let (_, grad) = loss_and_gradient(&batch, &w, cfg, tcfg.temperature);
            for (wj, gj) in w.iter_mut().zip(grad.iter()) {
                *wj -= tcfg.learning_rate * gj;
            }
        }
        let (loss, _) = loss_and_gradient(&all, &w, cfg, tcfg.temperature);
        if !loss.is_finite() {
            return Err(TrainError::Diverged(epoch));
        }
        loss_trace.push(loss);
        prior_trace.push(softmax(&w));
    }
    Ok(TrainReport { priors: w, loss_trace, prior_trace })
}
