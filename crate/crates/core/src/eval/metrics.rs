//! Confusion counts and the derived classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub true_neg: u64,
    pub false_pos: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }

    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted.is_malicious(), actual.is_malicious()) {
            (true, true) => self.true_pos += 1,
            (false, false) => self.true_neg += 1,
            (true, false) => self.false_pos += 1,
            (false, true) => self.false_neg += 1,
        }
    }
}

/// Derived metrics. Accuracy is a percentage; the rest lie in [0, 1].
/// `degenerate` is set when any sub-metric had a zero denominator and was
/// reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    pub degenerate: bool,
}

/// accuracy = (TP+TN)/(TP+TN+FP+FN) × 100, precision = TP/(TP+FP),
/// recall = TP/(TP+FN), F1 = 2·P·R/(P+R), FPR = FP/(FP+TN).
pub fn metrics(c: &ConfusionCounts) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Partition("empty confusion counts".into()));
    }
    let mut degenerate = false;
    let mut ratio = |num: u64, den: u64| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (c.true_pos + c.true_neg) as f64 / total as f64 * 100.0;
    let precision = ratio(c.true_pos, c.true_pos + c.false_pos);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let fpr = ratio(c.false_pos, c.false_pos + c.true_neg);
    let f1 = if precision + recall == 0.0 {
        degenerate = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        fpr,
        degenerate,
    })
}

/// One row of a per-second evaluation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    /// Seconds since sample start.
    pub t: u32,
    /// Samples evaluated at this horizon.
    pub n: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    /// Samples that had no observations yet and defaulted to benign.
    /// Fractional after averaging across runs.
    pub no_data: f64,
    pub degenerate: bool,
}
