use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_logistic, ConfusionMatrix, LogisticModel, TrainConfig};
use crate::baselines::TextSidecar;
use crate::error::{Error, Result};
use crate::pooling::{pool_records, PooledMatrix, PoolingStrategy};
use crate::store::{stratified_folds, Dataset};

/// A subset of one dataset's records, plus its text sidecar when available.
#[derive(Clone, Copy)]
pub struct Split<'a> {
    pub dataset: &'a Dataset,
    pub positions: &'a [usize],
    pub texts: Option<&'a TextSidecar>,
}

impl<'a> Split<'a> {
    pub fn new(dataset: &'a Dataset, positions: &'a [usize], texts: Option<&'a TextSidecar>) -> Self {
        Split { dataset, positions, texts }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Turns a training split and an evaluation split into matrices over one
/// shared feature space. Anything fitted (a vocabulary, a feature
/// selection) is fitted on the training split only.
pub trait Featurizer: Sync {
    fn name(&self) -> String;
    fn featurize(&self, train: Split<'_>, eval: Split<'_>) -> Result<(PooledMatrix, PooledMatrix)>;
}

impl Featurizer for PoolingStrategy {
    fn name(&self) -> String {
        PoolingStrategy::name(self)
    }

    fn featurize(&self, train: Split<'_>, eval: Split<'_>) -> Result<(PooledMatrix, PooledMatrix)> {
        Ok((pool_records(train.dataset, train.positions, self)?, pool_records(eval.dataset, eval.positions, self)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub strategy: String,
    pub k: usize,
    pub seed: u64,
    pub per_fold_macro_f1: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
    pub confusion: Vec<ConfusionMatrix>,
    /// Regularization strength used in each fold.
    pub l2_per_fold: Vec<f64>,
    pub n_examples: usize,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
    pub model: LogisticModel,
    pub l2_strength: f64,
    pub n_train: usize,
    pub n_test: usize,
}

fn choose_l2(train: Split<'_>, featurizer: &dyn Featurizer, config: &TrainConfig) -> Result<f64> {
    let Some(grid) = &config.l2_grid else {
        return Ok(config.l2_strength);
    };
    let inner = train.dataset.select(train.positions);
    let texts = train.texts;
    let folds = stratified_folds(&inner, 3, config.seed)?;
    let fixed = TrainConfig { l2_grid: None, ..config.clone() };
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &l2 in grid {
        let cfg = TrainConfig { l2_strength: l2, ..fixed.clone() };
        let mut total = 0.0;
        for f in 0..3 {
            let (tr, te) = folds.split(&inner, f);
            total += fit_and_score(Split::new(&inner, &tr, texts), Split::new(&inner, &te, texts), featurizer, &cfg)?.macro_f1;
        }
        if total > best.0 {
            best = (total, l2);
        }
    }
    Ok(best.1)
}

/// Featurizes, trains on `train` and scores macro-F1 on `eval`.
pub fn fit_and_score(train: Split<'_>, eval: Split<'_>, featurizer: &dyn Featurizer, config: &TrainConfig) -> Result<FitOutcome> {
    config.validate()?;
    let l2 = choose_l2(train, featurizer, config)?;
    let (train_m, eval_m) = featurizer.featurize(train, eval)?;
    if train_m.width != eval_m.width {
        return Err(Error::DimensionMismatch(format!(
            "train features have {} columns, eval features {}",
            train_m.width, eval_m.width
        )));
    }
    let classes = train_m.class_count();
    if eval_m.class_count() != classes {
        return Err(Error::DimensionMismatch(format!(
            "train has {classes} classes, eval has {}",
            eval_m.class_count()
        )));
    }
    let cfg = TrainConfig { l2_strength: l2, l2_grid: None, ..config.clone() };
    let model = train_logistic(&train_m, &cfg)?;
    let predicted = model.predict(&eval_m)?;
    let confusion = ConfusionMatrix::compute(&eval_m.labels, &predicted, classes)?;
    Ok(FitOutcome {
        macro_f1: confusion.macro_f1(),
        confusion,
        model,
        l2_strength: l2,
        n_train: train_m.len(),
        n_test: eval_m.len(),
    })
}

/// Stratified k-fold CV of the pooled-SAE probe.
pub fn cross_validate(dataset: &Dataset, strategy: &PoolingStrategy, config: &TrainConfig, k: usize) -> Result<CvReport> {
    cross_validate_with(dataset, None, strategy, config, k)
}

/// Stratified k-fold CV with any featurizer. Folds come from `config.seed`.
pub fn cross_validate_with(
    dataset: &Dataset,
    texts: Option<&TextSidecar>,
    featurizer: &dyn Featurizer,
    config: &TrainConfig,
    k: usize,
) -> Result<CvReport> {
    config.validate()?;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("cross-validation needs k >= 2, got {k}")));
    }
    let folds = stratified_folds(dataset, k, config.seed)?;
    let outcomes: Vec<FitOutcome> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = folds.split(dataset, f);
            fit_and_score(Split::new(dataset, &train, texts), Split::new(dataset, &test, texts), featurizer, config)
        })
        .collect::<Result<_>>()?;
    let per_fold: Vec<f64> = outcomes.iter().map(|o| o.macro_f1).collect();
    let mean = per_fold.iter().sum::<f64>() / k as f64;
    let std = (per_fold.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k as f64).sqrt();
    Ok(CvReport {
        strategy: featurizer.name(),
        k,
        seed: config.seed,
        mean,
        std,
        l2_per_fold: outcomes.iter().map(|o| o.l2_strength).collect(),
        confusion: outcomes.into_iter().map(|o| o.confusion).collect(),
        per_fold_macro_f1: per_fold,
        n_examples: dataset.len(),
    })
}
