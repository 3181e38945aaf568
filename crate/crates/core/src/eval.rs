//! Span-level precision/recall/F1 (exact boundary match, micro-averaged)
//! and token-level diagnostics.

use serde::{Deserialize, Serialize};

use crate::corpus::{MentionSpan, Tag};
use crate::error::{Error, Result};

/// Micro-averaged counts and the derived rates.
///
/// A predicted span scores as a true positive only when an identical
/// (start, end) span exists in the same sentence's gold set. When both
/// gold and predictions are empty, precision, recall, and F1 are all
/// defined as 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = if tp + fp == 0 {
            if fn_ == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            if fp == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }

    /// Exact count merge; partitioned shards combine into the whole-corpus
    /// result.
    pub fn merge(&self, other: &Metrics) -> Metrics {
        Metrics::from_counts(
            self.true_positives + other.true_positives,
            self.false_positives + other.false_positives,
            self.false_negatives + other.false_negatives,
        )
    }

    /// Flat key-value report.
    pub fn report(&self) -> String {
        format!(
            "true_positives\t{}\nfalse_positives\t{}\nfalse_negatives\t{}\nprecision\t{:.3}\nrecall\t{:.3}\nf1\t{:.3}\n",
            self.true_positives,
            self.false_positives,
            self.false_negatives,
            self.precision,
            self.recall,
            self.f1
        )
    }

    /// Machine-readable single-line record.
    pub fn record(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize")
    }
}

/// Span-exact micro-averaged precision/recall/F1 over parallel per-sentence
/// span lists.
pub fn span_prf(gold: &[Vec<MentionSpan>], pred: &[Vec<MentionSpan>]) -> Result<Metrics> {
    if gold.len() != pred.len() {
        return Err(Error::Validation(format!(
            "{} gold sentences vs {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (g, p) in gold.iter().zip(pred) {
        for span in p {
            if g.contains(span) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        for span in g {
            if !p.contains(span) {
                fn_ += 1;
            }
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_))
}

/// Fraction of positions with equal tags.
pub fn token_accuracy(gold: &[Tag], pred: &[Tag]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Validation(format!(
            "{} gold tags vs {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Ok(1.0);
    }
    let hits = gold.iter().zip(pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / gold.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(pairs: &[(usize, usize)]) -> Vec<MentionSpan> {
        pairs.iter().map(|&(s, e)| MentionSpan::new(s, e)).collect()
    }

    #[test]
    fn perfect_prediction() {
        let gold = vec![spans(&[(1, 3), (5, 6)])];
        let m = span_prf(&gold, &gold).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn half_recall() {
        let gold = vec![spans(&[(1, 3), (5, 6)])];
        let pred = vec![spans(&[(1, 3)])];
        let m = span_prf(&gold, &pred).unwrap();
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.5);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_error_is_a_full_miss() {
        let gold = vec![spans(&[(1, 3)])];
        let pred = vec![spans(&[(1, 2)])];
        let m = span_prf(&gold, &pred).unwrap();
        assert_eq!(m.true_positives, 0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn both_empty_is_vacuously_perfect() {
        let m = span_prf(&[vec![]], &[vec![]]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_predictions_with_gold_present() {
        let m = span_prf(&[spans(&[(0, 1)])], &[vec![]]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(span_prf(&[vec![]], &[]).is_err());
    }

    #[test]
    fn precision_and_recall_swap_under_argument_swap() {
        let a = vec![spans(&[(0, 2), (4, 5)]), spans(&[])];
        let b = vec![spans(&[(0, 2)]), spans(&[(1, 2)])];
        let ab = span_prf(&a, &b).unwrap();
        let ba = span_prf(&b, &a).unwrap();
        assert_eq!(ab.precision, ba.recall);
        assert_eq!(ab.recall, ba.precision);
    }

    #[test]
    fn sharded_counts_merge_exactly() {
        let gold = vec![
            spans(&[(0, 2)]),
            spans(&[(1, 3), (4, 5)]),
            spans(&[]),
            spans(&[(2, 3)]),
        ];
        let pred = vec![
            spans(&[(0, 2), (3, 4)]),
            spans(&[(1, 3)]),
            spans(&[(0, 1)]),
            spans(&[]),
        ];
        let whole = span_prf(&gold, &pred).unwrap();
        let first = span_prf(&gold[..2], &pred[..2]).unwrap();
        let second = span_prf(&gold[2..], &pred[2..]).unwrap();
        assert_eq!(first.merge(&second), whole);
    }

    #[test]
    fn token_accuracy_basics() {
        use Tag::*;
        assert_eq!(
            token_accuracy(&[Outside, Begin], &[Outside, Begin]).unwrap(),
            1.0
        );
        assert_eq!(
            token_accuracy(&[Outside, Begin], &[Begin, Outside]).unwrap(),
            0.0
        );
        assert_eq!(
            token_accuracy(
                &[Outside, Begin, Inside, Outside],
                &[Outside, Begin, Outside, Begin]
            )
            .unwrap(),
            0.5
        );
        assert!(token_accuracy(&[Outside], &[]).is_err());
    }

    #[test]
    fn report_formats_three_decimals() {
        let m = Metrics::from_counts(885, 115, 115);
        assert!(m.report().contains("precision\t0.885"));
        let record = m.record();
        assert!(record.starts_with('{') && record.contains("\"f1\""));
    }
}
