use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::TrainConfig;
use crate::error::{Error, Result};
use crate::harness::{FeatureStrategy, SweepSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Cv,
    Transfer,
    Sweep,
    Overlap,
    Strategies,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Cv => "cv",
            Experiment::Transfer => "transfer",
            Experiment::Sweep => "sweep",
            Experiment::Overlap => "overlap",
            Experiment::Strategies => "strategies",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpEntry {
    pub tag: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texts: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierBlock {
    pub l2_strength: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2_grid: Option<Vec<f64>>,
}

impl Default for ClassifierBlock {
    fn default() -> Self {
        let t = TrainConfig::default();
        ClassifierBlock {
            l2_strength: t.l2_strength,
            max_iterations: t.max_iterations,
            gradient_tolerance: t.gradient_tolerance,
            l2_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    /// Tag of the dump trained and tested on natively; defaults to the
    /// first dump.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub native: Option<String>,
    /// Tag of the dump used for the transfer regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<String>,
    pub rates: Vec<f64>,
    pub seeds: usize,
    pub test_fraction: f64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        let s = SweepSettings::default();
        SweepBlock { native: None, transfer: None, rates: s.rates, seeds: s.seeds, test_fraction: s.test_fraction }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapBlock {
    pub k: usize,
}

impl Default for OverlapBlock {
    fn default() -> Self {
        OverlapBlock { k: 20 }
    }
}

fn default_folds() -> usize {
    5
}

/// Experiment configuration, read from TOML (or JSON for `.json` files).
/// Relative dump paths resolve against the config file's directory;
/// a relative `output_dir` resolves against the output root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Model scale tag, recorded in the run manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// When set, every dump's layer must be one of these.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<u32>,
    /// When set, every dump must have this SAE width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sae_width: Option<usize>,
    pub dumps: Vec<DumpEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strategies: Vec<FeatureStrategy>,
    #[serde(default)]
    pub classifier: ClassifierBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub overlap: OverlapBlock,
}

impl RunConfig {
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let config: RunConfig = if json {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        config.check()?;
        Ok(config)
    }

    /// Reads and checks a config file. Returns the config with relative
    /// dump paths resolved, and the hash of the config as written.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let json = path.extension().is_some_and(|e| e == "json");
        let mut config =
            Self::parse(&text, json).map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(e))))?;
        let hash = config.hash();
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut config.dumps {
            d.path = base.join(&d.path);
            if let Some(t) = &mut d.texts {
                *t = base.join(&*t);
            }
        }
        for d in &config.dumps {
            for p in std::iter::once(&d.path).chain(d.texts.as_ref()) {
                if !p.exists() {
                    return Err(Error::Config(format!("{}: dump {}: {} does not exist", path.display(), d.tag, p.display())));
                }
            }
        }
        Ok((config, hash))
    }

    fn check(&self) -> Result<()> {
        if self.dumps.is_empty() {
            return Err(Error::Config("at least one dump is required".into()));
        }
        for (i, d) in self.dumps.iter().enumerate() {
            if self.dumps[..i].iter().any(|o| o.tag == d.tag) {
                return Err(Error::Config(format!("duplicate dump tag {:?}", d.tag)));
            }
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.overlap.k == 0 {
            return Err(Error::Config("overlap.k must be positive".into()));
        }
        for tag in [&self.sweep.native, &self.sweep.transfer].into_iter().flatten() {
            if !self.dumps.iter().any(|d| &d.tag == tag) {
                return Err(Error::Config(format!("sweep refers to unknown dump tag {tag:?}")));
            }
        }
        self.train_config().validate().map_err(strip_config)?;
        self.sweep_settings().validate().map_err(strip_config)?;
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            l2_strength: self.classifier.l2_strength,
            max_iterations: self.classifier.max_iterations,
            gradient_tolerance: self.classifier.gradient_tolerance,
            seed: self.seed,
            l2_grid: self.classifier.l2_grid.clone(),
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings { rates: self.sweep.rates.clone(), seeds: self.sweep.seeds, test_fraction: self.sweep.test_fraction }
    }

    /// Strategies to run: the configured list, or the defaults for the
    /// experiment.
    pub fn strategies(&self) -> Vec<FeatureStrategy> {
        if !self.strategies.is_empty() {
            return self.strategies.clone();
        }
        match self.experiment {
            Experiment::Strategies => {
                crate::harness::default_strategy_grid(true, self.dumps[0].texts.is_some())
            }
            _ => vec![FeatureStrategy::full_sae_binarized()],
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn strip_config(e: Error) -> Error {
    Error::Config(strip(e))
}
