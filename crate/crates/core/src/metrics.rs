//! Classification metrics.

use thiserror::Error;

use crate::eventlog::Label;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gold and predicted label sequences have different lengths ({gold} vs {predicted})")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("cannot score an empty label sequence")]
    Empty,
}

/// Per-class and aggregate counts behind a macro-F1 score.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

pub fn confusion_counts(gold: &[Label], predicted: &[Label]) -> Result<ClassCounts, MetricsError> {
    if gold.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { gold: gold.len(), predicted: predicted.len() });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = ClassCounts { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&g, &p) in gold.iter().zip(predicted) {
        match (g.is_positive(), p.is_positive()) {
            (true, true) => counts.tp += 1,
            (false, true) => counts.fp += 1,
            (false, false) => counts.tn += 1,
            (true, false) => counts.fn_ += 1,
        }
    }
    Ok(counts)
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Macro-averaged F1: the unweighted mean of the positive-class and
/// negative-class F1 scores. A class absent from both gold and predictions
/// contributes an F1 of 0.
pub fn macro_f1(gold: &[Label], predicted: &[Label]) -> Result<f64, MetricsError> {
    let c = confusion_counts(gold, predicted)?;
    let f1_pos = f1(c.tp, c.fp, c.fn_);
    // the negative class mirrors the counts
    let f1_neg = f1(c.tn, c.fn_, c.fp);
    Ok((f1_pos + f1_neg) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn perfect_predictions_score_one() {
        let gold = [P, N, P, N];
        assert_eq!(macro_f1(&gold, &gold).unwrap(), 1.0);
    }

    #[test]
    fn half_right_example() {
        let gold = [P, P, N, N];
        let pred = [P, N, P, N];
        assert!((macro_f1(&gold, &pred).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_class_predictions_stay_below_one() {
        let gold = [P, N, P, N];
        let pred = [P, P, P, P];
        let score = macro_f1(&gold, &pred).unwrap();
        assert!(score < 1.0);
    }

    #[test]
    fn symmetric_under_class_swap() {
        let gold = [P, P, N, P, N, N, P];
        let pred = [P, N, N, P, P, N, N];
        let flip = |l: Label| if l.is_positive() { N } else { P };
        let gold_f: Vec<Label> = gold.iter().map(|&l| flip(l)).collect();
        let pred_f: Vec<Label> = pred.iter().map(|&l| flip(l)).collect();
        let a = macro_f1(&gold, &pred).unwrap();
        let b = macro_f1(&gold_f, &pred_f).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(matches!(macro_f1(&[P], &[]), Err(MetricsError::LengthMismatch { .. })));
        assert!(matches!(macro_f1(&[], &[]), Err(MetricsError::Empty)));
    }
}
