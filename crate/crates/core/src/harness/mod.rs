//! Experiment orchestration: transfer matrices, sampling sweeps, strategy
//! comparisons, feature-overlap tables and their reports, plus the
//! synthetic generator that makes all of them runnable without a model.

mod overlap;
mod report;
mod strategy;
mod svg;
mod sweep;
mod synth;
mod transfer;

pub use overlap::{overlap_table, train_full, OverlapRow};
pub use report::{emit_report, render_report, ReportFormat, Results};
pub use strategy::{default_strategy_grid, FeatureStrategy};
pub use sweep::{sampling_sweep, strategy_sweep, sweep_split_ids, Regime, SweepPoint, SweepSettings};
pub use synth::{generate_synthetic, synthetic_texts, FeaturePermutation, SyntheticSpec};
pub use transfer::{transfer_matrix, TransferCell};

use crate::baselines::TextSidecar;
use crate::classifier::Split;
use crate::error::{Error, Result};
use crate::store::Dataset;

/// A dataset under a tag (a language, a translated variant, a task), with
/// its optional text sidecar.
#[derive(Debug, Clone)]
pub struct LabeledSource {
    pub tag: String,
    pub dataset: Dataset,
    pub texts: Option<TextSidecar>,
}

impl LabeledSource {
    pub fn new(tag: impl Into<String>, dataset: Dataset) -> Self {
        LabeledSource { tag: tag.into(), dataset, texts: None }
    }

    pub fn with_texts(mut self, texts: TextSidecar) -> Self {
        self.texts = Some(texts);
        self
    }

    pub fn split<'a>(&'a self, positions: &'a [usize]) -> Split<'a> {
        Split::new(&self.dataset, positions, self.texts.as_ref())
    }

    pub fn all_positions(&self) -> Vec<usize> {
        (0..self.dataset.len()).collect()
    }
}

/// All sources must share SAE width, hidden width and label set.
pub(crate) fn check_compatible(sources: &[&LabeledSource]) -> Result<()> {
    let Some(first) = sources.first() else {
        return Ok(());
    };
    let m = &first.dataset.manifest;
    for s in &sources[1..] {
        let o = &s.dataset.manifest;
        if o.sae_width != m.sae_width {
            return Err(Error::DimensionMismatch(format!(
                "SAE width mismatch: {} has {}, {} has {}",
                first.tag, m.sae_width, s.tag, o.sae_width
            )));
        }
        if o.hidden_dim != m.hidden_dim {
            return Err(Error::DimensionMismatch(format!(
                "hidden width mismatch: {} has {}, {} has {}",
                first.tag, m.hidden_dim, s.tag, o.hidden_dim
            )));
        }
        if o.label_names != m.label_names {
            return Err(Error::DimensionMismatch(format!("label sets of {} and {} differ", first.tag, s.tag)));
        }
    }
    Ok(())
}
