//! Seeded synthetic dumps with planted class-specific features.
//!
//! Class `c` owns features `c*P .. (c+1)*P` (before any permutation). Every
//! example of class `c` fires each of its planted features on one random
//! token with a value drawn from `planted_activation_range`, so with a lower
//! bound above 1.0 the pooled value clears the default binarization
//! threshold. Each token also carries `noise_features_per_token` distinct
//! non-planted features with sub-threshold values. An optional permutation
//! relabels all feature indices, which stands in for a language whose
//! features live at different dictionary positions.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baselines::TextSidecar;
use crate::error::{Error, Result};
use crate::store::{Dataset, DumpManifest, ExampleRecord, SparseTokenFeatures, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturePermutation {
    /// `i -> (i + offset) mod m`.
    Rotate(usize),
    /// A uniformly random permutation drawn from this seed.
    Shuffle(u64),
    /// `i -> map[i]`.
    Explicit(Vec<u32>),
}

impl FeaturePermutation {
    /// The permutation as an index map over `0..width`.
    pub fn resolve(&self, width: usize) -> Result<Vec<u32>> {
        let map: Vec<u32> = match self {
            FeaturePermutation::Rotate(offset) => (0..width).map(|i| ((i + offset) % width) as u32).collect(),
            FeaturePermutation::Shuffle(seed) => {
                let mut m: Vec<u32> = (0..width as u32).collect();
                m.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                m
            }
            FeaturePermutation::Explicit(m) => m.clone(),
        };
        if map.len() != width {
            return Err(Error::InvalidArgument(format!("permutation has {} entries for width {width}", map.len())));
        }
        let mut seen = vec![false; width];
        for &v in &map {
            if v as usize >= width || std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::InvalidArgument("feature permutation is not a bijection".into()));
            }
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub width: usize,
    pub classes: usize,
    pub examples_per_class: usize,
    pub planted_features_per_class: usize,
    pub planted_activation_range: (f64, f64),
    pub noise_features_per_token: usize,
    pub noise_activation_range: (f64, f64),
    pub tokens_per_example_range: (usize, usize),
    pub hidden_dim: usize,
    /// Class-mean offset added to the hidden state before unit Gaussian noise.
    pub hidden_signal: f64,
    pub seed: u64,
    pub language_tag: Option<String>,
    pub feature_permutation: Option<FeaturePermutation>,
    pub model_id: String,
    pub task_name: String,
    pub layer_index: u32,
    /// First example id; later ids count up from here.
    pub id_offset: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            width: 16384,
            classes: 2,
            examples_per_class: 500,
            planted_features_per_class: 10,
            planted_activation_range: (1.5, 3.0),
            noise_features_per_token: 8,
            noise_activation_range: (0.01, 0.5),
            tokens_per_example_range: (4, 16),
            hidden_dim: 16,
            hidden_signal: 1.0,
            seed: 0,
            language_tag: None,
            feature_permutation: None,
            model_id: "synthetic".into(),
            task_name: "synthetic-planted".into(),
            layer_index: 0,
            id_offset: 0,
        }
    }
}

fn valid_range(r: (f64, f64)) -> bool {
    r.0.is_finite() && r.1.is_finite() && r.0 > 0.0 && r.0 <= r.1
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("synthetic spec: {m}")));
        if self.classes == 0 || self.examples_per_class == 0 || self.planted_features_per_class == 0 {
            return bad("classes, examples_per_class and planted_features_per_class must be positive".into());
        }
        let planted = self.classes * self.planted_features_per_class;
        if planted + self.noise_features_per_token > self.width {
            return bad(format!(
                "{planted} planted + {} noise features per token do not fit in width {}",
                self.noise_features_per_token, self.width
            ));
        }
        if self.width > u32::MAX as usize {
            return bad("width exceeds the 32-bit index space".into());
        }
        if !valid_range(self.planted_activation_range) {
            return bad("planted_activation_range must be positive reals with lo <= hi".into());
        }
        if !valid_range(self.noise_activation_range) || self.noise_activation_range.1 > 1.0 {
            return bad("noise_activation_range must satisfy 0 < lo <= hi <= 1".into());
        }
        let (tlo, thi) = self.tokens_per_example_range;
        if tlo == 0 || tlo > thi {
            return bad("tokens_per_example_range must satisfy 1 <= lo <= hi".into());
        }
        if self.hidden_dim == 0 || !self.hidden_signal.is_finite() {
            return bad("hidden_dim must be positive and hidden_signal finite".into());
        }
        if let Some(p) = &self.feature_permutation {
            p.resolve(self.width)?;
        }
        Ok(())
    }

    /// Planted features of `class` after applying the permutation.
    pub fn planted_features(&self, class: usize) -> Result<Vec<u32>> {
        let p = self.planted_features_per_class;
        let base = (class * p) as u32..((class + 1) * p) as u32;
        let mut out: Vec<u32> = match &self.feature_permutation {
            Some(perm) => {
                let map = perm.resolve(self.width)?;
                base.map(|i| map[i as usize]).collect()
            }
            None => base.collect(),
        };
        out.sort_unstable();
        Ok(out)
    }

    pub fn label_names(&self) -> Vec<String> {
        (0..self.classes).map(|c| format!("class{c}")).collect()
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let perm = spec.feature_permutation.as_ref().map(|p| p.resolve(spec.width)).transpose()?;
    let planted_per_class = spec.planted_features_per_class;
    let planted_total = spec.classes * planted_per_class;
    let noise_pool = spec.width - planted_total;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.classes * spec.examples_per_class);
    let mut entry_total = 0usize;
    let mut token_total = 0usize;

    for i in 0..spec.examples_per_class {
        for class in 0..spec.classes {
            let n_tokens = rng.random_range(spec.tokens_per_example_range.0..=spec.tokens_per_example_range.1);
            let mut tokens: Vec<Vec<(u32, f32)>> = vec![Vec::new(); n_tokens];
            for f in 0..planted_per_class {
                let t = rng.random_range(0..n_tokens);
                let (lo, hi) = spec.planted_activation_range;
                tokens[t].push(((class * planted_per_class + f) as u32, sample_value(&mut rng, lo, hi)));
            }
            for token in &mut tokens {
                for j in index::sample(&mut rng, noise_pool, spec.noise_features_per_token) {
                    let (lo, hi) = spec.noise_activation_range;
                    token.push(((planted_total + j) as u32, sample_value(&mut rng, lo, hi)));
                }
            }
            let tokens: Vec<SparseTokenFeatures> = tokens
                .into_iter()
                .map(|mut entries| {
                    if let Some(map) = &perm {
                        for e in &mut entries {
                            e.0 = map[e.0 as usize];
                        }
                    }
                    entries.sort_by_key(|e| e.0);
                    entry_total += entries.len();
                    SparseTokenFeatures::new(entries)
                })
                .collect();
            token_total += tokens.len();
            let hidden: Vec<f32> = (0..spec.hidden_dim)
                .map(|j| {
                    let mean = if j % spec.classes == class { spec.hidden_signal } else { 0.0 };
                    let noise: f64 = rng.sample(StandardNormal);
                    (mean + noise) as f32
                })
                .collect();
            records.push(ExampleRecord {
                example_id: spec.id_offset + (i * spec.classes + class) as u64,
                tokens,
                last_hidden: Some(hidden),
                label: class as u32,
                language: spec.language_tag.clone(),
            });
        }
    }

    let manifest = DumpManifest {
        model_id: spec.model_id.clone(),
        layer_index: spec.layer_index,
        sae_width: spec.width,
        hidden_dim: spec.hidden_dim,
        task_name: spec.task_name.clone(),
        label_names: spec.label_names(),
        language: spec.language_tag.clone(),
        sae_l0: Some(entry_total as f64 / token_total.max(1) as f64),
        format_version: FORMAT_VERSION,
    };
    Dataset::new(manifest, records)
}

/// A positive f32 drawn uniformly from `[lo, hi]`.
fn sample_value(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f32 {
    let v = if lo == hi { lo } else { rng.random_range(lo..hi) } as f32;
    if v > 0.0 {
        v
    } else {
        f32::MIN_POSITIVE
    }
}

/// One word per token, naming its strongest feature (`f<index>`), or `pad`
/// for a token with no activations.
pub fn synthetic_texts(dataset: &Dataset) -> TextSidecar {
    let mut sidecar = TextSidecar::default();
    for r in &dataset.records {
        let words: Vec<String> = r
            .tokens
            .iter()
            .map(|t| {
                t.entries
                    .iter()
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map_or_else(|| "pad".to_string(), |&(i, _)| format!("f{i}"))
            })
            .collect();
        sidecar.insert(r.example_id, words.join(" "));
    }
    sidecar
}
