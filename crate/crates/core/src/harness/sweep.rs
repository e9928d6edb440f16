use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_compatible, FeatureStrategy, LabeledSource};
use crate::classifier::{cross_validate_with, fit_and_score, CvReport, Featurizer, TrainConfig};
use crate::error::{Error, Result};
use crate::store::{stratified_split, subsample_positions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Native,
    EnglishTransfer,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Native => "native",
            Regime::EnglishTransfer => "english_transfer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sampling_rate: f64,
    pub strategy: String,
    pub regime: Regime,
    /// Mean over seeds.
    pub macro_f1: f64,
    /// Base seed; seed `i` of the repeat is `seed + i`.
    pub seed: u64,
    pub per_seed_macro_f1: Vec<f64>,
    /// Training-set size at this rate (first seed).
    pub n_train: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub rates: Vec<f64>,
    pub seeds: usize,
    pub test_fraction: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { rates: vec![0.1, 0.25, 0.5, 1.0], seeds: 3, test_fraction: 0.2 }
    }
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one sampling rate".into()));
        }
        if let Some(r) = self.rates.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(Error::InvalidArgument(format!("sampling rate {r} outside (0, 1]")));
        }
        if self.seeds == 0 {
            return Err(Error::InvalidArgument("sweep needs at least one seed".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("test fraction {} outside (0, 1)", self.test_fraction)));
        }
        Ok(())
    }
}

struct SeedSplit {
    seed: u64,
    train: Vec<usize>,
    test: Vec<usize>,
}

fn carve(native: &LabeledSource, config: &TrainConfig, settings: &SweepSettings) -> Result<Vec<SeedSplit>> {
    (0..settings.seeds as u64)
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let (train, test) = stratified_split(&native.dataset, settings.test_fraction, seed)?;
            Ok(SeedSplit { seed, train, test })
        })
        .collect()
}

/// Positions (into `source`) of the training subsample at `rate`.
fn training_positions(source: &LabeledSource, pool: &[usize], rate: f64, seed: u64) -> Result<Vec<usize>> {
    let labels: Vec<usize> = pool.iter().map(|&p| source.dataset.records[p].label()).collect();
    let picked = subsample_positions(&labels, source.dataset.class_count(), rate, seed)?;
    Ok(picked.into_iter().map(|i| pool[i]).collect())
}

fn ids(source: &LabeledSource, positions: &[usize]) -> BTreeSet<u64> {
    positions.iter().map(|&p| source.dataset.records[p].example_id).collect()
}

/// Example ids of the native training subsample and of the held-out test
/// split for repeat `repeat` at `rate`.
pub fn sweep_split_ids(
    native: &LabeledSource,
    rate: f64,
    repeat: usize,
    config: &TrainConfig,
    settings: &SweepSettings,
) -> Result<(BTreeSet<u64>, BTreeSet<u64>)> {
    let seed = config.seed.wrapping_add(repeat as u64);
    let (train, test) = stratified_split(&native.dataset, settings.test_fraction, seed)?;
    let picked = training_positions(native, &train, rate, seed)?;
    Ok((ids(native, &picked), ids(native, &test)))
}

/// For every (rate, strategy, regime): subsample the training data at the
/// rate, train, and score on the held-out native test split. The split is
/// carved per seed before any subsampling; scores are averaged over seeds.
/// The transfer regime trains on subsamples of all of `transfer`.
pub fn sampling_sweep(
    native: &LabeledSource,
    transfer: Option<&LabeledSource>,
    strategies: &[FeatureStrategy],
    config: &TrainConfig,
    settings: &SweepSettings,
) -> Result<Vec<SweepPoint>> {
    settings.validate()?;
    config.validate()?;
    if strategies.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one strategy".into()));
    }
    if let Some(t) = transfer {
        check_compatible(&[native, t])?;
    }
    let splits = carve(native, config, settings)?;
    let mut regimes = vec![Regime::Native];
    if transfer.is_some() {
        regimes.push(Regime::EnglishTransfer);
    }
    let mut keys = Vec::new();
    for &rate in &settings.rates {
        for (si, _) in strategies.iter().enumerate() {
            for &regime in &regimes {
                keys.push((rate, si, regime));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..keys.len()).flat_map(|k| (0..splits.len()).map(move |s| (k, s))).collect();
    let scores: Vec<(f64, usize)> = jobs
        .par_iter()
        .map(|&(k, s)| {
            let (rate, si, regime) = keys[k];
            let split = &splits[s];
            let seed_cfg = TrainConfig { seed: split.seed, ..config.clone() };
            let (source, picked) = match regime {
                Regime::Native => {
                    let picked = training_positions(native, &split.train, rate, split.seed)?;
                    if !ids(native, &picked).is_disjoint(&ids(native, &split.test)) {
                        return Err(Error::InvalidArgument("sweep training subsample overlaps the test split".into()));
                    }
                    (native, picked)
                }
                Regime::EnglishTransfer => {
                    let t = transfer.expect("transfer regime without a source");
                    (t, training_positions(t, &t.all_positions(), rate, split.seed)?)
                }
            };
            let fit = fit_and_score(source.split(&picked), native.split(&split.test), &strategies[si], &seed_cfg)?;
            Ok((fit.macro_f1, fit.n_train))
        })
        .collect::<Result<_>>()?;
    let per_key = splits.len();
    Ok(keys
        .iter()
        .enumerate()
        .map(|(k, &(rate, si, regime))| {
            let chunk = &scores[k * per_key..(k + 1) * per_key];
            let per_seed: Vec<f64> = chunk.iter().map(|c| c.0).collect();
            SweepPoint {
                sampling_rate: rate,
                strategy: strategies[si].name(),
                regime,
                macro_f1: per_seed.iter().sum::<f64>() / per_seed.len() as f64,
                seed: config.seed,
                per_seed_macro_f1: per_seed,
                n_train: chunk[0].1,
            }
        })
        .collect())
}

/// Cross-validates every strategy on one source.
pub fn strategy_sweep(
    source: &LabeledSource,
    strategies: &[FeatureStrategy],
    config: &TrainConfig,
    k: usize,
) -> Result<Vec<CvReport>> {
    if strategies.is_empty() {
        return Err(Error::InvalidArgument("strategy sweep needs at least one strategy".into()));
    }
    strategies
        .par_iter()
        .map(|s| cross_validate_with(&source.dataset, source.texts.as_ref(), s, config, k))
        .collect()
}
