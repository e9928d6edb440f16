use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[true_class][predicted_class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn compute(y_true: &[usize], y_pred: &[usize], class_count: usize) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::DimensionMismatch(format!(
                "y_true has {} labels, y_pred has {}",
                y_true.len(),
                y_pred.len()
            )));
        }
        let mut counts = vec![vec![0; class_count]; class_count];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= class_count || p >= class_count {
                return Err(Error::InvalidArgument(format!("label {} >= class count {class_count}", t.max(p))));
            }
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    /// Per-class F1 = 2TP / (2TP + FP + FN), 0 when the denominator is 0.
    pub fn per_class_f1(&self) -> Vec<f64> {
        let k = self.class_count();
        (0..k)
            .map(|c| {
                let tp = self.counts[c][c];
                let fp: usize = (0..k).filter(|&t| t != c).map(|t| self.counts[t][c]).sum();
                let fne: usize = (0..k).filter(|&p| p != c).map(|p| self.counts[c][p]).sum();
                let denom = 2 * tp + fp + fne;
                if denom == 0 {
                    0.0
                } else {
                    (2 * tp) as f64 / denom as f64
                }
            })
            .collect()
    }

    pub fn macro_f1(&self) -> f64 {
        let f1 = self.per_class_f1();
        if f1.is_empty() {
            return 0.0;
        }
        f1.iter().sum::<f64>() / f1.len() as f64
    }
}

/// Unweighted mean of per-class F1 over all `class_count` classes.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize], class_count: usize) -> Result<f64> {
    Ok(ConfusionMatrix::compute(y_true, y_pred, class_count)?.macro_f1())
}

pub fn per_class_f1(y_true: &[usize], y_pred: &[usize], class_count: usize) -> Result<Vec<f64>> {
    Ok(ConfusionMatrix::compute(y_true, y_pred, class_count)?.per_class_f1())
}
