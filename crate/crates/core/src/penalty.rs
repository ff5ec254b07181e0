//! Perceptron learning of soft-constraint penalties.
//!
//! The soft-constrained problem scores `(y, z)` by `w·y − c·z`, a linear model
//! in `c` with feature vector `−z`. A perceptron step towards the gold output
//! is therefore `c ← c + η (z_pred − z_gold)`, truncated at zero so the
//! problem stays bounded. Constraints the base model already satisfies, or
//! that gold output violates, are driven to (and kept at) zero.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainModel, LabeledSequence};
use crate::constraints::{ConstraintSet, Penalty};
use crate::dual::{soft_dd, DdConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyLearnerConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub averaging: bool,
    pub inner_max_iters: usize,
    pub step0: f64,
    pub initial_penalty: f64,
    /// Shuffle the example order each epoch with this seed; `None` keeps
    /// corpus order.
    pub shuffle_seed: Option<u64>,
}

impl Default for PenaltyLearnerConfig {
    fn default() -> Self {
        PenaltyLearnerConfig {
            epochs: 5,
            learning_rate: 0.1,
            averaging: true,
            inner_max_iters: 100,
            step0: 1.0,
            initial_penalty: 0.0,
            shuffle_seed: None,
        }
    }
}

/// Learned penalties plus, per constraint, how many learner steps saw it
/// violated by the prediction and by gold.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedPenalties {
    pub penalties: Vec<f64>,
    pub predicted_violations: Vec<u64>,
    pub gold_violations: Vec<u64>,
}

/// Learns one penalty per constraint on a held-out corpus with `base` frozen.
pub fn learn_penalties(
    dev: &[LabeledSequence],
    constraints: &ConstraintSet,
    base: &ChainModel,
    config: &PenaltyLearnerConfig,
) -> Result<Vec<f64>> {
    Ok(learn_penalties_with_counts(dev, constraints, base, config)?.penalties)
}

pub fn learn_penalties_with_counts(
    dev: &[LabeledSequence],
    constraints: &ConstraintSet,
    base: &ChainModel,
    config: &PenaltyLearnerConfig,
) -> Result<LearnedPenalties> {
    if dev.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(config.learning_rate.is_finite() && config.learning_rate >= 0.0) {
        return Err(Error::InvalidLearningRate(config.learning_rate));
    }
    if !(config.initial_penalty.is_finite() && config.initial_penalty >= 0.0) {
        return Err(Error::InvalidPenalty {
            index: 0,
            value: config.initial_penalty,
        });
    }
    let n = base.num_labels();
    for ex in dev {
        if ex.features.len() != ex.labels.len() {
            return Err(Error::LengthMismatch {
                expected: ex.features.len(),
                found: ex.labels.len(),
            });
        }
        if let Some(bad) = ex.labels.iter().find(|l| l.index() >= n) {
            return Err(Error::LabelOutOfRange(bad.index()));
        }
    }

    let tables = dev
        .iter()
        .map(|ex| base.score_sequence(&ex.features))
        .collect::<Result<Vec<_>>>()?;
    let gold_z: Vec<Vec<u64>> = dev
        .iter()
        .map(|ex| constraints.violations(&ex.labels))
        .collect();
    let dd = DdConfig {
        max_iters: config.inner_max_iters,
        step0: config.step0,
        ..DdConfig::default()
    };

    let m = constraints.len();
    let mut c = vec![config.initial_penalty; m];
    // averaging: mean of c over steps = c_final − Σ_s Δ_s (s − 1) / T
    let mut weighted = vec![0.0; m];
    let mut step = 0usize;
    let mut pred_count = vec![0u64; m];
    let mut gold_count = vec![0u64; m];
    let mut order: Vec<usize> = (0..dev.len()).collect();
    let mut rng = config.shuffle_seed.map(ChaCha8Rng::seed_from_u64);

    for _ in 0..config.epochs {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        for &i in &order {
            let current = constraints.with_soft_penalties(&c)?;
            let pred = soft_dd(&tables[i], &current, &dd)?;
            for j in 0..m {
                let (zp, zg) = (pred.violations[j], gold_z[i][j]);
                pred_count[j] += u64::from(zp > 0);
                gold_count[j] += u64::from(zg > 0);
                if zp != zg {
                    let next = (c[j] + config.learning_rate * (zp as f64 - zg as f64)).max(0.0);
                    weighted[j] += (next - c[j]) * step as f64;
                    c[j] = next;
                }
            }
            step += 1;
        }
    }

    let penalties = if config.averaging && step > 0 {
        c.iter()
            .zip(&weighted)
            .map(|(ci, w)| (ci - w / step as f64).max(0.0))
            .collect()
    } else {
        c
    };
    Ok(LearnedPenalties {
        penalties,
        predicted_violations: pred_count,
        gold_violations: gold_count,
    })
}

/// Constraints with penalty above a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    pub constraints: ConstraintSet,
    /// Original index of each kept constraint.
    pub indices: Vec<usize>,
    /// Fraction of constraints dropped.
    pub sparsity: f64,
}

/// Keeps constraints with penalty `> threshold`, attaching the penalties.
pub fn active_constraints(
    constraints: &ConstraintSet,
    penalties: &[f64],
    threshold: f64,
) -> Result<ActiveSet> {
    if penalties.len() != constraints.len() {
        return Err(Error::LengthMismatch {
            expected: constraints.len(),
            found: penalties.len(),
        });
    }
    let indices: Vec<usize> = (0..penalties.len())
        .filter(|&i| penalties[i] > threshold)
        .collect();
    let kept: Vec<Penalty> = indices
        .iter()
        .map(|&i| Penalty::Soft(penalties[i]))
        .collect();
    let sparsity = if penalties.is_empty() {
        0.0
    } else {
        1.0 - indices.len() as f64 / penalties.len() as f64
    };
    Ok(ActiveSet {
        constraints: constraints.select(&indices).with_penalties(&kept)?,
        indices,
        sparsity,
    })
}
