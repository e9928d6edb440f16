use serde::{Deserialize, Serialize};

use crate::baselines::{fit_tfidf, hidden_state_rows, transform_tfidf, TextCorpus};
use crate::classifier::{Featurizer, Split};
use crate::error::Result;
use crate::pooling::{pool_records, PooledMatrix, PoolingStrategy};
use crate::select::{mean_diff_scores_with, project, top_n_features};

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    1.0
}

fn default_min_df() -> usize {
    1
}

/// Every way of turning records into probe features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureStrategy {
    /// Pooled SAE features, optionally top-N masked and binarized.
    Sae {
        #[serde(default)]
        top_n: usize,
        #[serde(default = "default_true")]
        binarize: bool,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    /// The `n` columns with the largest class-mean gap on the training
    /// split, over pooled (by default raw, unbinarized) activations.
    MeanDiff {
        n: usize,
        #[serde(default)]
        top_n: usize,
        #[serde(default)]
        binarize: bool,
        #[serde(default = "default_threshold")]
        threshold: f64,
        #[serde(default)]
        signed: bool,
    },
    HiddenStates,
    Tfidf {
        #[serde(default = "default_min_df")]
        min_df: usize,
        #[serde(default)]
        max_features: Option<usize>,
    },
}

impl FeatureStrategy {
    pub fn full_sae_binarized() -> Self {
        FeatureStrategy::Sae { top_n: 0, binarize: true, threshold: 1.0 }
    }

    pub fn sae(pooling: PoolingStrategy) -> Self {
        FeatureStrategy::Sae { top_n: pooling.top_n, binarize: pooling.binarize, threshold: pooling.threshold }
    }

    pub fn mean_diff(n: usize) -> Self {
        FeatureStrategy::MeanDiff { n, top_n: 0, binarize: false, threshold: 1.0, signed: false }
    }

    pub fn tfidf() -> Self {
        FeatureStrategy::Tfidf { min_df: 1, max_features: None }
    }

    fn pooling(&self) -> Option<PoolingStrategy> {
        match *self {
            FeatureStrategy::Sae { top_n, binarize, threshold } | FeatureStrategy::MeanDiff { top_n, binarize, threshold, .. } => {
                Some(PoolingStrategy { top_n, binarize, threshold })
            }
            _ => None,
        }
    }

    pub fn needs_texts(&self) -> bool {
        matches!(self, FeatureStrategy::Tfidf { .. })
    }
}

impl Featurizer for FeatureStrategy {
    fn name(&self) -> String {
        match self {
            FeatureStrategy::Sae { .. } => self.pooling().unwrap().name(),
            FeatureStrategy::MeanDiff { n, signed, .. } => {
                let pooling = self.pooling().unwrap();
                let mut name = format!("mean_diff_top{n}");
                if pooling.binarize {
                    name.push_str("_binarized");
                }
                if pooling.top_n > 0 {
                    name.push_str(&format!("_tok{}", pooling.top_n));
                }
                if *signed {
                    name.push_str("_signed");
                }
                name
            }
            FeatureStrategy::HiddenStates => "hidden_states".into(),
            FeatureStrategy::Tfidf { .. } => "tfidf".into(),
        }
    }

    fn featurize(&self, train: Split<'_>, eval: Split<'_>) -> Result<(PooledMatrix, PooledMatrix)> {
        match self {
            FeatureStrategy::Sae { .. } => self.pooling().unwrap().featurize(train, eval),
            FeatureStrategy::MeanDiff { n, signed, .. } => {
                let pooling = self.pooling().unwrap();
                let train_m = pool_records(train.dataset, train.positions, &pooling)?;
                let eval_m = pool_records(eval.dataset, eval.positions, &pooling)?;
                let mut scores = mean_diff_scores_with(&train_m, *signed)?;
                if *signed {
                    // Rank by the positive-class excess only.
                    for s in &mut scores.scores {
                        *s = s.max(0.0);
                    }
                }
                let selected = top_n_features(&scores, (*n).min(train_m.width))?;
                Ok((project(&train_m, &selected)?, project(&eval_m, &selected)?))
            }
            FeatureStrategy::HiddenStates => Ok((
                hidden_state_rows(train.dataset, train.positions)?,
                hidden_state_rows(eval.dataset, eval.positions)?,
            )),
            FeatureStrategy::Tfidf { min_df, max_features } => {
                let train_c = TextCorpus::from_split(train)?;
                let eval_c = TextCorpus::from_split(eval)?;
                let vocab = fit_tfidf(&train_c, *min_df, *max_features)?;
                Ok((transform_tfidf(&train_c, &vocab), transform_tfidf(&eval_c, &vocab)))
            }
        }
    }
}

/// The pooling grid `{top-0, top-20, top-50} x {binarized, raw}`, then the
/// hidden-state baseline and, when requested, TF-IDF.
pub fn default_strategy_grid(include_hidden: bool, include_tfidf: bool) -> Vec<FeatureStrategy> {
    let mut out = Vec::new();
    for top_n in [0, 20, 50] {
        for binarize in [true, false] {
            out.push(FeatureStrategy::Sae { top_n, binarize, threshold: 1.0 });
        }
    }
    if include_hidden {
        out.push(FeatureStrategy::HiddenStates);
    }
    if include_tfidf {
        out.push(FeatureStrategy::tfidf());
    }
    out
}
