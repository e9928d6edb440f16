//! Activation dumps: the on-disk format and the in-memory dataset model.
//!
//! A dump holds, for every input sequence, the SAE activation coefficients
//! of each token as sparse `(feature index, activation)` pairs, an optional
//! last-token hidden state, and a class label. Everything downstream reads a
//! [`Dataset`] that has passed [`Dataset::validate`].

mod binary;
mod folds;
mod jsonl;

pub use binary::{decode_dump, encode_dump, read_dump, write_dump, FORMAT_VERSION, MAGIC};
pub use folds::{stratified_folds, stratified_split, subsample, subsample_positions, FoldAssignment};
pub use jsonl::{export_jsonl, import_jsonl, read_jsonl, write_jsonl};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ValidationReport};

/// Dataset-level metadata written at the head of every dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpManifest {
    pub model_id: String,
    pub layer_index: u32,
    /// SAE dictionary size `m`.
    pub sae_width: usize,
    /// Residual stream width `d`.
    pub hidden_dim: usize,
    pub task_name: String,
    pub label_names: Vec<String>,
    pub language: Option<String>,
    /// Recorded L0 of the chosen SAE, when known.
    pub sae_l0: Option<f64>,
    pub format_version: u32,
}

impl DumpManifest {
    pub fn class_count(&self) -> usize {
        self.label_names.len()
    }

    pub fn label_name(&self, label: usize) -> &str {
        self.label_names.get(label).map(String::as_str).unwrap_or("?")
    }

    fn validate_into(&self, report: &mut ValidationReport) {
        if self.label_names.is_empty() {
            report.push(None, "manifest has no label names");
        }
        let mut seen = HashSet::new();
        for name in &self.label_names {
            if !seen.insert(name.as_str()) {
                report.push(None, format!("duplicate label name {name:?}"));
            }
        }
        if self.sae_width == 0 {
            report.push(None, "sae_width must be positive");
        }
        if self.sae_width > u32::MAX as usize + 1 {
            report.push(None, "sae_width exceeds the 32-bit index space");
        }
        if self.hidden_dim == 0 {
            report.push(None, "hidden_dim must be positive");
        }
        if self.format_version == 0 {
            report.push(None, "format_version must be positive");
        }
        if let Some(l0) = self.sae_l0 {
            if !(l0.is_finite() && l0 >= 0.0) {
                report.push(None, format!("sae_l0 must be a nonnegative real, got {l0}"));
            }
        }
    }
}

/// One token's SAE activations, sorted by feature index, zeros omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparseTokenFeatures {
    pub entries: Vec<(u32, f32)>,
}

impl SparseTokenFeatures {
    pub fn new(entries: Vec<(u32, f32)>) -> Self {
        SparseTokenFeatures { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl From<Vec<(u32, f32)>> for SparseTokenFeatures {
    fn from(entries: Vec<(u32, f32)>) -> Self {
        SparseTokenFeatures { entries }
    }
}

/// One input sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub example_id: u64,
    pub tokens: Vec<SparseTokenFeatures>,
    pub last_hidden: Option<Vec<f32>>,
    pub label: u32,
    pub language: Option<String>,
}

impl ExampleRecord {
    pub fn label(&self) -> usize {
        self.label as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DumpManifest,
    pub records: Vec<ExampleRecord>,
}

impl Dataset {
    /// Builds a dataset, rejecting it if any invariant is violated.
    pub fn new(manifest: DumpManifest, records: Vec<ExampleRecord>) -> Result<Self> {
        let dataset = Dataset { manifest, records };
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn width(&self) -> usize {
        self.manifest.sae_width
    }

    pub fn class_count(&self) -> usize {
        self.manifest.class_count()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(ExampleRecord::label).collect()
    }

    /// Number of records per class, indexed by label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for r in &self.records {
            if let Some(c) = counts.get_mut(r.label()) {
                *c += 1;
            }
        }
        counts
    }

    /// Number of distinct labels that actually occur.
    pub fn present_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// A new dataset holding the records at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> Dataset {
        Dataset {
            manifest: self.manifest.clone(),
            records: positions.iter().map(|&p| self.records[p].clone()).collect(),
        }
    }

    /// Checks every manifest and record invariant, collecting up to ten
    /// violations.
    pub fn validate(&self) -> Result<()> {
        self.validation_report().into_result()
    }

    pub fn validation_report(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.manifest.validate_into(&mut report);
        let width = self.manifest.sae_width;
        let classes = self.manifest.class_count();
        let hidden_dim = self.manifest.hidden_dim;
        let mut ids = HashSet::with_capacity(self.records.len());
        for r in &self.records {
            let id = Some(r.example_id);
            if !ids.insert(r.example_id) {
                report.push(id, "duplicate example_id");
            }
            if r.tokens.is_empty() {
                report.push(id, "record has no tokens");
            }
            if r.label() >= classes {
                report.push(id, format!("label {} >= class count {classes}", r.label));
            }
            if let Some(h) = &r.last_hidden {
                if h.len() != hidden_dim {
                    report.push(id, format!("hidden state length {} != hidden_dim {hidden_dim}", h.len()));
                }
                if h.iter().any(|v| !v.is_finite()) {
                    report.push(id, "hidden state has a non-finite value");
                }
            }
            for (t, token) in r.tokens.iter().enumerate() {
                let mut prev: Option<u32> = None;
                for &(index, value) in &token.entries {
                    if index as usize >= width {
                        report.push(id, format!("token {t}: feature index {index} >= width {width}"));
                    }
                    if prev.is_some_and(|p| index <= p) {
                        report.push(id, format!("token {t}: feature indices not strictly increasing at {index}"));
                    }
                    if !(value.is_finite() && value > 0.0) {
                        report.push(id, format!("token {t}: activation {value} at feature {index} is not a positive finite real"));
                    }
                    prev = Some(index);
                }
            }
        }
        report
    }
}
