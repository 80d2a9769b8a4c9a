//! Metrics, cross-validation, robustness sweeps and the Nemenyi post-hoc test.

mod cv;
mod nemenyi;
mod sweep;

pub use cv::{
    cross_validate, stratified_folds, Cl1Trainer, CvSpec, EvalResult, FoldRecord, Hyper, LsqTrainer, ScalingScope,
    Selection, Summary, Trainer,
};
pub use nemenyi::{mean_ranks, nemenyi, nemenyi_cd, q_alpha, NemenyiResult};
pub use sweep::{robustness_sweep, write_table, SweepRow, SweepTable, TABLE_HEADER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Label;

/// Capped L1 loss `min(|u|, ε)`.
pub fn capped_l1(u: f64, eps: f64) -> f64 {
    u.abs().min(eps)
}

/// Confusion counts with the positive class as "positive".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: predicted.len(),
            });
        }
        let mut c = Confusion::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Positive, Label::Positive) => c.tp += 1,
                (Label::Negative, Label::Negative) => c.tn += 1,
                (Label::Negative, Label::Positive) => c.fp += 1,
                (Label::Positive, Label::Negative) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// `(TP + TN) / total`.
pub fn accuracy(c: &Confusion) -> Result<f64> {
    if c.total() == 0 {
        return Err(Error::invalid("accuracy of an empty confusion table"));
    }
    Ok((c.tp + c.tn) as f64 / c.total() as f64)
}

/// `2TP / (2TP + FN + FP)`, or `None` when there are no positives and no
/// positive predictions.
pub fn f1(c: &Confusion) -> Result<Option<f64>> {
    if c.total() == 0 {
        return Err(Error::invalid("F1 of an empty confusion table"));
    }
    let den = 2 * c.tp + c.fn_ + c.fp;
    Ok((den > 0).then(|| (2 * c.tp) as f64 / den as f64))
}
