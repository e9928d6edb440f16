use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_compatible, LabeledSource};
use crate::classifier::{cross_validate_with, fit_and_score, Featurizer, TrainConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferCell {
    pub train_source: String,
    pub test_target: String,
    pub strategy: String,
    pub macro_f1: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl TransferCell {
    pub fn is_native(&self) -> bool {
        self.train_source == self.test_target
    }
}

/// Trains on each source and tests on each target. Diagonal cells are the
/// mean of a `k`-fold CV on that source (so no cell scores on its own
/// training rows); for them `n_train` is the mean training-fold size and
/// `n_test` counts every record once.
pub fn transfer_matrix(
    sources: &[LabeledSource],
    featurizer: &dyn Featurizer,
    config: &TrainConfig,
    k: usize,
) -> Result<Vec<TransferCell>> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("transfer matrix needs at least one source".into()));
    }
    check_compatible(&sources.iter().collect::<Vec<_>>())?;
    let pairs: Vec<(usize, usize)> =
        (0..sources.len()).flat_map(|a| (0..sources.len()).map(move |b| (a, b))).collect();
    pairs
        .into_par_iter()
        .map(|(a, b)| {
            let (train, test) = (&sources[a], &sources[b]);
            let (macro_f1, n_train, n_test) = if a == b {
                let n = train.dataset.len();
                let report = cross_validate_with(&train.dataset, train.texts.as_ref(), featurizer, config, k)?;
                (report.mean, n - n / k, n)
            } else {
                let train_pos = train.all_positions();
                let test_pos = test.all_positions();
                let fit = fit_and_score(train.split(&train_pos), test.split(&test_pos), featurizer, config)?;
                (fit.macro_f1, fit.n_train, fit.n_test)
            };
            Ok(TransferCell {
                train_source: train.tag.clone(),
                test_target: test.tag.clone(),
                strategy: featurizer.name(),
                macro_f1,
                n_train,
                n_test,
            })
        })
        .collect()
}
