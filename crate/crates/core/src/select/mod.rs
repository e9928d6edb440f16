//! Feature scoring and selection: Mean-Diff ranking, column projection,
//! classifier-weight ranking and Jaccard overlap of feature sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::classifier::LogisticModel;
use crate::error::{Error, Result};
use crate::pooling::{BinaryVector, PooledMatrix, PooledVector, Rows};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScores {
    pub scores: Vec<f64>,
    /// `(positive class, negative class)`.
    pub class_pair: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOrigin {
    MeanDiff,
    ClassifierWeights,
}

/// Sorted set of selected feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub origin: FeatureOrigin,
    pub indices: Vec<u32>,
}

impl FeatureSet {
    pub fn new(origin: FeatureOrigin, indices: impl IntoIterator<Item = u32>) -> Self {
        let set: BTreeSet<u32> = indices.into_iter().collect();
        FeatureSet { origin, indices: set.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `|mean_pos(X[.,i]) - mean_neg(X[.,i])|` for every column.
pub fn mean_diff_scores(matrix: &PooledMatrix) -> Result<FeatureScores> {
    mean_diff_scores_with(matrix, false)
}

/// Mean-Diff scores; `signed` keeps `mean_pos - mean_neg` without the
/// absolute value. The positive class is the higher of the two labels.
pub fn mean_diff_scores_with(matrix: &PooledMatrix, signed: bool) -> Result<FeatureScores> {
    let present: BTreeSet<usize> = matrix.labels.iter().copied().collect();
    if present.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "Mean-Diff requires binary task ({} classes present)",
            present.len()
        )));
    }
    let neg = *present.first().unwrap();
    let pos = *present.last().unwrap();
    let mut sums = [vec![0.0; matrix.width], vec![0.0; matrix.width]];
    let mut counts = [0usize; 2];
    for (i, &label) in matrix.labels.iter().enumerate() {
        let side = usize::from(label == pos);
        counts[side] += 1;
        for (j, v) in matrix.row(i) {
            sums[side][j] += v;
        }
    }
    let scores = (0..matrix.width)
        .map(|j| {
            let d = sums[1][j] / counts[1] as f64 - sums[0][j] / counts[0] as f64;
            if signed {
                d
            } else {
                d.abs()
            }
        })
        .collect();
    Ok(FeatureScores { scores, class_pair: (pos, neg) })
}

/// Positions of the `k` largest values; ties at the boundary go to the
/// lower index. Returned in ascending index order.
pub(crate) fn top_k_positions(values: &[f64], k: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_by(|&a, &b| values[b as usize].total_cmp(&values[a as usize]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

pub fn top_n_features(scores: &FeatureScores, n: usize) -> Result<FeatureSet> {
    if n == 0 || n > scores.scores.len() {
        return Err(Error::InvalidArgument(format!("n = {n} must be in 1..={}", scores.scores.len())));
    }
    if scores.scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("feature scores must be finite".into()));
    }
    Ok(FeatureSet { origin: FeatureOrigin::MeanDiff, indices: top_k_positions(&scores.scores, n) })
}

/// Restricts `matrix` to the columns in `features`, in ascending order.
/// Indices refer to the matrix's current columns; the original feature
/// indices are kept in `column_map`.
pub fn project(matrix: &PooledMatrix, features: &FeatureSet) -> Result<PooledMatrix> {
    if let Some(&bad) = features.indices.iter().find(|&&i| i as usize >= matrix.width) {
        return Err(Error::InvalidArgument(format!("feature {bad} out of range for width {}", matrix.width)));
    }
    let mut new_col = vec![u32::MAX; matrix.width];
    for (c, &i) in features.indices.iter().enumerate() {
        new_col[i as usize] = c as u32;
    }
    let width = features.len();
    let rows = match &matrix.rows {
        Rows::Sparse(rows) => Rows::Sparse(
            rows.iter()
                .map(|r| PooledVector {
                    width,
                    entries: r
                        .entries
                        .iter()
                        .filter(|&&(i, _)| new_col[i as usize] != u32::MAX).map(|&(i, v)| (new_col[i as usize], v))
                        .collect(),
                })
                .collect(),
        ),
        Rows::Binary(rows) => Rows::Binary(
            rows.iter()
                .map(|r| BinaryVector {
                    width,
                    active: r.active.iter().map(|&i| new_col[i as usize]).filter(|&c| c != u32::MAX).collect(),
                })
                .collect(),
        ),
        Rows::Dense(rows) => {
            Rows::Dense(rows.iter().map(|r| features.indices.iter().map(|&i| r[i as usize]).collect()).collect())
        }
    };
    let column_map = features.indices.iter().map(|&i| matrix.original_index(i as usize)).collect();
    Ok(PooledMatrix {
        rows,
        labels: matrix.labels.clone(),
        example_ids: matrix.example_ids.clone(),
        width,
        meta: matrix.meta.clone(),
        strategy: matrix.strategy,
        column_map: Some(column_map),
    })
}

/// The `k` features with the largest absolute weight for `class_index`.
/// Binary models use the single effective weight vector `w_1 - w_0`, so the
/// class index does not matter there.
pub fn top_k_by_classifier_weight(model: &LogisticModel, k: usize, class_index: usize) -> Result<FeatureSet> {
    let features = model.feature_count();
    if k == 0 || k > features {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={features}")));
    }
    if class_index >= model.class_count() {
        return Err(Error::InvalidArgument(format!("class {class_index} >= class count {}", model.class_count())));
    }
    let magnitudes: Vec<f64> = if model.class_count() == 2 {
        let (w0, w1) = (model.class_weights(0), model.class_weights(1));
        w1.iter().zip(w0).map(|(a, b)| (a - b).abs()).collect()
    } else {
        model.class_weights(class_index).iter().map(|w| w.abs()).collect()
    };
    Ok(FeatureSet { origin: FeatureOrigin::ClassifierWeights, indices: top_k_positions(&magnitudes, k) })
}

/// `|a ∩ b| / |a ∪ b|`, and 1.0 when both sets are empty.
pub fn jaccard_overlap(a: &FeatureSet, b: &FeatureSet) -> f64 {
    let sa: BTreeSet<u32> = a.indices.iter().copied().collect();
    let sb: BTreeSet<u32> = b.indices.iter().copied().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}
