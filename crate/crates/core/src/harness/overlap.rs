use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::LabeledSource;
use crate::classifier::{fit_and_score, Featurizer, LogisticModel, TrainConfig};
use crate::error::{Error, Result};
use crate::select::{jaccard_overlap, top_k_by_classifier_weight, FeatureSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub train_lang: String,
    pub test_lang: String,
    pub overlap: f64,
}

/// Trains one probe on every record of `source`.
pub fn train_full(source: &LabeledSource, featurizer: &dyn Featurizer, config: &TrainConfig) -> Result<LogisticModel> {
    let all = source.all_positions();
    Ok(fit_and_score(source.split(&all), source.split(&all), featurizer, config)?.model)
}

/// Jaccard overlap of the top-`k` weight features of every ordered pair of
/// models. Rankings use the last class, which for binary models is the
/// single effective weight vector.
pub fn overlap_table(models: &BTreeMap<String, LogisticModel>, k: usize) -> Result<Vec<OverlapRow>> {
    let mut features = None;
    let mut sets: Vec<(&String, FeatureSet)> = Vec::with_capacity(models.len());
    for (tag, model) in models {
        match features {
            None => features = Some(model.feature_count()),
            Some(f) if f != model.feature_count() => {
                return Err(Error::DimensionMismatch(format!(
                    "model {tag} has {} features, expected {f}",
                    model.feature_count()
                )))
            }
            _ => {}
        }
        sets.push((tag, top_k_by_classifier_weight(model, k, model.class_count() - 1)?));
    }
    let mut rows = Vec::with_capacity(sets.len() * sets.len());
    for (a, sa) in &sets {
        for (b, sb) in &sets {
            rows.push(OverlapRow { train_lang: (*a).clone(), test_lang: (*b).clone(), overlap: jaccard_overlap(sa, sb) });
        }
    }
    Ok(rows)
}
