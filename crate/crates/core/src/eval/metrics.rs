use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Confusion counts with B as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub r#fn: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn count(pred: &[Label], gold: &[Label]) -> Result<Self> {
        if pred.len() != gold.len() {
            return Err(Error::Argument(format!(
                "{} predicted labels for {} gold labels",
                pred.len(),
                gold.len()
            )));
        }
        let mut c = ConfusionCounts::default();
        for (p, g) in pred.iter().zip(gold) {
            match (p.is_boundary(), g.is_boundary()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.r#fn += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.r#fn + self.tn
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.r#fn += o.r#fn;
        self.tn += o.tn;
    }
}

/// Boundary precision, recall and F1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
    /// Set when precision or recall had a zero denominator.
    pub degenerate: bool,
}

impl MetricsReport {
    /// Ratios with the 0/0 = 0 convention.
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(counts.tp, counts.tp + counts.fp);
        let recall = ratio(counts.tp, counts.tp + counts.r#fn);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        MetricsReport {
            precision,
            recall,
            f1,
            counts,
            degenerate: counts.tp + counts.fp == 0 || counts.tp + counts.r#fn == 0,
        }
    }
}

pub fn compute_metrics(pred: &[Label], gold: &[Label]) -> Result<MetricsReport> {
    Ok(MetricsReport::from_counts(ConfusionCounts::count(pred, gold)?))
}

/// Mean and sample standard deviation; the deviation of fewer than two
/// values is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
