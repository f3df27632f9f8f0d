use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive-class (deleted) precision, recall and F1 with the confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl EvalMetrics {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        EvalMetrics { precision, recall, f1, accuracy: ratio(tp + tn, tp + fp + tn + fn_), tp, fp, tn, fn_ }
    }

    /// Component-wise mean, used for cross-validation summaries.
    pub fn mean(all: &[EvalMetrics]) -> EvalMetrics {
        let n = all.len().max(1) as f64;
        let avg = |f: fn(&EvalMetrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        let sum = |f: fn(&EvalMetrics) -> u64| all.iter().map(f).sum::<u64>();
        EvalMetrics {
            precision: avg(|m| m.precision),
            recall: avg(|m| m.recall),
            f1: avg(|m| m.f1),
            accuracy: avg(|m| m.accuracy),
            tp: sum(|m| m.tp),
            fp: sum(|m| m.fp),
            tn: sum(|m| m.tn),
            fn_: sum(|m| m.fn_),
        }
    }
}

pub fn evaluate(pred: &[bool], truth: &[bool]) -> Result<EvalMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(EvalMetrics::from_counts(tp, fp, tn, fn_))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let m = evaluate(&[true, false, true], &[true, false, true]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        // TP=2, FP=1, FN=2
        let m = evaluate(&[true, true, true, false, false], &[true, true, false, true, true]).unwrap();
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.recall, 0.5);
        assert!((m.f1 - 4.0 / 7.0).abs() < 1e-12);
        let m = evaluate(&[false, false], &[true, false]).unwrap();
        assert_eq!((m.precision, m.f1), (0.0, 0.0));
        assert!(evaluate(&[true], &[]).is_err());
    }
}
