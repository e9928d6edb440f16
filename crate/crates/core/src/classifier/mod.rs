//! The linear probe: L2-regularized multinomial logistic regression, trained
//! full-batch with L-BFGS, plus macro-F1 scoring and k-fold cross-validation.

mod cv;
pub mod lbfgs;
mod metrics;
pub mod objective;

pub use cv::{cross_validate, cross_validate_with, fit_and_score, CvReport, Featurizer, FitOutcome, Split};
pub use metrics::{macro_f1, per_class_f1, ConfusionMatrix};
pub use objective::SoftmaxObjective;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pooling::PooledMatrix;

/// Bias given to classes that have no training rows, so they are never
/// predicted while all model entries stay finite.
pub const ABSENT_CLASS_BIAS: f64 = -1.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2_strength: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Seeds fold assignment and any other randomized step around training.
    pub seed: u64,
    /// When set, `l2_strength` is chosen per training set by an inner
    /// stratified 3-fold CV over these values.
    pub l2_grid: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { l2_strength: 1.0, max_iterations: 1000, gradient_tolerance: 1e-6, seed: 0, l2_grid: None }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_strength.is_finite() && self.l2_strength >= 0.0) {
            return Err(Error::InvalidArgument(format!("l2_strength must be a nonnegative real, got {}", self.l2_strength)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        if !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("gradient_tolerance must be positive, got {}", self.gradient_tolerance)));
        }
        if let Some(grid) = &self.l2_grid {
            if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidArgument("l2_grid must be a non-empty list of nonnegative reals".into()));
            }
        }
        Ok(())
    }
}

/// Trained probe. `weights` is class-major: row `c` holds the
/// `feature_count` weights of class `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    class_count: usize,
    feature_count: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    /// `[class_count, feature_count]`.
    shape: [usize; 2],
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Serialize for LogisticModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelFile { shape: [self.class_count, self.feature_count], weights: self.weights.clone(), biases: self.biases.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogisticModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = ModelFile::deserialize(d)?;
        LogisticModel::from_parts(f.shape[0], f.shape[1], f.weights, f.biases).map_err(serde::de::Error::custom)
    }
}

impl LogisticModel {
    pub fn from_parts(class_count: usize, feature_count: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if class_count < 2 || feature_count == 0 {
            return Err(Error::InvalidArgument(format!(
                "model needs >= 2 classes and >= 1 feature, got {class_count} x {feature_count}"
            )));
        }
        if weights.len() != class_count * feature_count || biases.len() != class_count {
            return Err(Error::DimensionMismatch(format!(
                "weights {} / biases {} do not match shape {class_count} x {feature_count}",
                weights.len(),
                biases.len()
            )));
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("model entries must be finite".into()));
        }
        Ok(LogisticModel { class_count, feature_count, weights, biases })
    }

    pub fn from_class_weights(rows: Vec<Vec<f64>>, biases: Vec<f64>) -> Result<Self> {
        let c = rows.len();
        let f = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != f) {
            return Err(Error::DimensionMismatch("ragged weight rows".into()));
        }
        Self::from_parts(c, f, rows.concat(), biases)
    }

    /// All-zero model.
    pub fn zeros(class_count: usize, feature_count: usize) -> Result<Self> {
        Self::from_parts(class_count, feature_count, vec![0.0; class_count * feature_count], vec![0.0; class_count])
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn class_weights(&self, class: usize) -> &[f64] {
        &self.weights[class * self.feature_count..(class + 1) * self.feature_count]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Flat parameters in the [`SoftmaxObjective`] layout.
    pub fn to_params(&self) -> Vec<f64> {
        let (c, f) = (self.class_count, self.feature_count);
        let mut theta = vec![0.0; (f + 1) * c];
        for class in 0..c {
            for j in 0..f {
                theta[j * c + class] = self.weights[class * f + j];
            }
            theta[f * c + class] = self.biases[class];
        }
        theta
    }

    pub fn from_params(class_count: usize, feature_count: usize, theta: &[f64]) -> Result<Self> {
        let (c, f) = (class_count, feature_count);
        if theta.len() != (f + 1) * c {
            return Err(Error::DimensionMismatch(format!("{} params for shape {c} x {f}", theta.len())));
        }
        let mut weights = vec![0.0; c * f];
        for class in 0..c {
            for j in 0..f {
                weights[class * f + j] = theta[j * c + class];
            }
        }
        Self::from_parts(c, f, weights, theta[f * c..].to_vec())
    }

    fn check_rows(&self, rows: &PooledMatrix) -> Result<()> {
        if rows.width != self.feature_count {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, model expects {}",
                rows.width, self.feature_count
            )));
        }
        Ok(())
    }

    fn scores_into(&self, rows: &PooledMatrix, i: usize, scores: &mut [f64]) {
        scores.copy_from_slice(&self.biases);
        let f = self.feature_count;
        for (j, v) in rows.row(i) {
            for (c, s) in scores.iter_mut().enumerate() {
                *s += v * self.weights[c * f + j];
            }
        }
    }

    /// Class scores `w_c · x + b_c` for every row.
    pub fn decision_function(&self, rows: &PooledMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_rows(rows)?;
        let mut out = Vec::with_capacity(rows.len());
        for i in 0..rows.len() {
            let mut s = vec![0.0; self.class_count];
            self.scores_into(rows, i, &mut s);
            out.push(s);
        }
        Ok(out)
    }

    /// Argmax class per row; ties go to the lowest class index.
    pub fn predict(&self, rows: &PooledMatrix) -> Result<Vec<usize>> {
        Ok(self.decision_function(rows)?.iter().map(|s| argmax(s)).collect())
    }

    pub fn predict_proba(&self, rows: &PooledMatrix) -> Result<Vec<Vec<f64>>> {
        let mut scores = self.decision_function(rows)?;
        for s in &mut scores {
            softmax_in_place(s);
        }
        Ok(scores)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = c;
        }
    }
    best
}

fn softmax_in_place(s: &mut [f64]) {
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for v in s.iter_mut() {
        *v = (*v - max).exp();
        z += *v;
    }
    for v in s.iter_mut() {
        *v /= z;
    }
}

/// Free-function form of [`LogisticModel::predict`].
pub fn predict(model: &LogisticModel, rows: &PooledMatrix) -> Result<Vec<usize>> {
    model.predict(rows)
}

/// Trains from the all-zero starting point.
pub fn train_logistic(matrix: &PooledMatrix, config: &TrainConfig) -> Result<LogisticModel> {
    train_logistic_from(matrix, config, None)
}

/// Trains starting from `init` (zeros when `None`). The optimum does not
/// depend on the start when `l2_strength > 0`.
pub fn train_logistic_from(matrix: &PooledMatrix, config: &TrainConfig, init: Option<&LogisticModel>) -> Result<LogisticModel> {
    config.validate()?;
    matrix.check()?;
    let class_count = matrix.class_count();
    let features = matrix.width;
    if features == 0 {
        return Err(Error::InvalidArgument("matrix has no feature columns".into()));
    }
    let present: BTreeSet<usize> = matrix.labels.iter().copied().collect();
    if present.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "training requires at least 2 classes with rows, found {}",
            present.len()
        )));
    }
    let present: Vec<usize> = present.into_iter().collect();
    let mut compact = vec![usize::MAX; class_count];
    for (k, &c) in present.iter().enumerate() {
        compact[c] = k;
    }
    let labels = matrix.labels.iter().map(|&l| compact[l]).collect();
    let k = present.len();
    let objective = SoftmaxObjective::with_labels(matrix, labels, k, config.l2_strength);

    let mut x0 = vec![0.0; objective.param_len()];
    if let Some(init) = init {
        if init.class_count != class_count || init.feature_count != features {
            return Err(Error::DimensionMismatch("initial model shape does not match the matrix".into()));
        }
        for (kc, &c) in present.iter().enumerate() {
            for j in 0..features {
                x0[j * k + kc] = init.weights[c * features + j];
            }
            x0[features * k + kc] = init.biases[c];
        }
    }
    let opts = lbfgs::LbfgsOptions {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        ..Default::default()
    };
    let out = lbfgs::minimize(|x, g| objective.value_and_gradient(x, g), x0, opts);
    if !out.converged {
        return Err(Error::NonConvergence { iterations: out.iterations, gradient_norm: out.gradient_inf_norm });
    }

    let mut weights = vec![0.0; class_count * features];
    let mut biases = vec![ABSENT_CLASS_BIAS; class_count];
    let bias_at = features * k;
    // Softmax is invariant to a common bias shift; report the zero-mean representative.
    let mean_bias = out.x[bias_at..].iter().sum::<f64>() / k as f64;
    for (kc, &c) in present.iter().enumerate() {
        for j in 0..features {
            weights[c * features + j] = out.x[j * k + kc];
        }
        biases[c] = out.x[bias_at + kc] - mean_bias;
    }
    LogisticModel::from_parts(class_count, features, weights, biases)
}

/// Objective value of `model` on `matrix`, in the training scaling.
pub fn objective_value(model: &LogisticModel, matrix: &PooledMatrix, l2: f64) -> Result<f64> {
    model.check_rows(matrix)?;
    if model.class_count != matrix.class_count() {
        return Err(Error::DimensionMismatch("class counts differ".into()));
    }
    Ok(SoftmaxObjective::new(matrix, l2).value(&model.to_params()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pooling::{MatrixMeta, Rows};

    fn dense(rows: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> PooledMatrix {
        let w = rows[0].len();
        PooledMatrix::new(Rows::Dense(rows), labels, w, MatrixMeta::anonymous(classes))
    }

    #[test]
    fn predict_examples() {
        let m = LogisticModel::from_class_weights(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(m.predict(&dense(vec![vec![2.0]], vec![0], 2)).unwrap(), vec![0]);
        let z = LogisticModel::zeros(3, 2).unwrap();
        let rows = dense(vec![vec![1.0, 2.0], vec![-3.0, 0.5]], vec![0, 1], 3);
        assert_eq!(z.predict(&rows).unwrap(), vec![0, 0]);
        for p in m.predict_proba(&dense(vec![vec![2.0], vec![-7.5]], vec![0, 0], 2)).unwrap() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(m.predict(&rows).is_err());
    }

    #[test]
    fn zero_features_give_prior() {
        let m = dense(vec![vec![0.0, 0.0]; 6], vec![0, 1, 0, 1, 0, 1], 2);
        let model = train_logistic(&m, &TrainConfig::default()).unwrap();
        assert!(model.weights().iter().all(|&w| w == 0.0));
        assert!((model.biases()[0] - model.biases()[1]).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let m = dense(vec![vec![1.0], vec![2.0]], vec![1, 1], 2);
        assert!(train_logistic(&m, &TrainConfig::default()).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let m = dense(vec![vec![f64::NAN], vec![2.0]], vec![0, 1], 2);
        assert!(train_logistic(&m, &TrainConfig::default()).is_err());
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let m = dense(vec![vec![-1.0, 0.3], vec![1.0, 0.2], vec![0.5, -1.0]], vec![0, 1, 1], 2);
        let cfg = TrainConfig { max_iterations: 1, gradient_tolerance: 1e-12, ..Default::default() };
        match train_logistic(&m, &cfg).unwrap_err() {
            Error::NonConvergence { iterations, gradient_norm } => {
                assert_eq!(iterations, 1);
                assert!(gradient_norm > 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn absent_class_never_predicted() {
        let m = dense(vec![vec![1.0], vec![-1.0], vec![1.2], vec![-0.8]], vec![0, 2, 0, 2], 3);
        let model = train_logistic(&m, &TrainConfig::default()).unwrap();
        assert_eq!(model.biases()[1], ABSENT_CLASS_BIAS);
        assert!(model.predict(&m).unwrap().iter().all(|&p| p != 1));
    }

    #[test]
    fn json_round_trip() {
        let m = LogisticModel::from_class_weights(vec![vec![0.5, -1.25], vec![0.0, 3.0]], vec![0.1, -0.1]).unwrap();
        let text = m.to_json().unwrap();
        assert!(text.starts_with("{\"shape\":[2,2]"));
        assert_eq!(LogisticModel::from_json(&text).unwrap(), m);
        assert!(LogisticModel::from_json("{\"shape\":[2,3],\"weights\":[1.0],\"biases\":[0.0,0.0]}").is_err());
    }

    #[test]
    fn params_round_trip() {
        let m = LogisticModel::from_class_weights(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]], vec![7.0, 8.0]).unwrap();
        let theta = m.to_params();
        assert_eq!(theta, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0, 7.0, 8.0]);
        assert_eq!(LogisticModel::from_params(2, 3, &theta).unwrap(), m);
    }

    #[test]
    fn shift_invariant_predictions() {
        let m = LogisticModel::from_class_weights(vec![vec![1.0, -0.5], vec![0.2, 0.4], vec![-1.0, 2.0]], vec![0.1, 0.0, -0.3]).unwrap();
        let shifted = LogisticModel::from_class_weights(
            vec![vec![1.0, -0.5], vec![0.2, 0.4], vec![-1.0, 2.0]],
            vec![5.1, 5.0, 4.7],
        )
        .unwrap();
        let rows = dense(vec![vec![1.0, 1.0], vec![-2.0, 0.5], vec![0.0, 3.0]], vec![0, 0, 0], 3);
        assert_eq!(m.predict(&rows).unwrap(), shifted.predict(&rows).unwrap());
    }
}
