use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::{Experiment, RunConfig};
use super::read_any;
use crate::baselines::TextSidecar;
use crate::error::{Error, Result};
use crate::harness::{
    emit_report, overlap_table, sampling_sweep, strategy_sweep, train_full, transfer_matrix, LabeledSource, ReportFormat,
    Results,
};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub results: Results,
}

struct Input {
    source: LabeledSource,
    sha256: String,
}

fn load_inputs(config: &RunConfig) -> Result<Vec<Input>> {
    config
        .dumps
        .iter()
        .map(|d| {
            let bytes = std::fs::read(&d.path).map_err(|e| Error::io(&d.path, e))?;
            let dataset = read_any(&d.path, None)?;
            let m = &dataset.manifest;
            if let Some(w) = config.sae_width {
                if m.sae_width != w {
                    return Err(Error::DimensionMismatch(format!(
                        "dump {} has SAE width {}, config says {w}",
                        d.tag, m.sae_width
                    )));
                }
            }
            if !config.layers.is_empty() && !config.layers.contains(&m.layer_index) {
                return Err(Error::Config(format!(
                    "dump {} is from layer {}, not one of {:?}",
                    d.tag, m.layer_index, config.layers
                )));
            }
            let mut source = LabeledSource::new(d.tag.clone(), dataset);
            if let Some(t) = &d.texts {
                source = source.with_texts(TextSidecar::read(t)?);
            }
            Ok(Input { source, sha256: hex::encode(Sha256::digest(&bytes)) })
        })
        .collect()
}

fn by_tag<'a>(sources: &'a [LabeledSource], tag: &str) -> &'a LabeledSource {
    sources.iter().find(|s| s.tag == tag).expect("tags checked at load")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs the experiment in `config_path` and writes its run directory.
pub fn execute(config_path: &Path, output_root: &Path) -> Result<RunOutcome> {
    let (config, hash) = RunConfig::load(config_path)?;
    let inputs = load_inputs(&config)?;
    let sources: Vec<LabeledSource> = inputs.iter().map(|i| i.source.clone()).collect();
    let train = config.train_config();
    let strategies = config.strategies();
    eprintln!("running {} over {} dump(s), {} strategy(ies)", config.experiment.as_str(), sources.len(), strategies.len());

    let mut models = BTreeMap::new();
    let results = match config.experiment {
        Experiment::Cv | Experiment::Strategies => {
            Results::Cv(strategy_sweep(&sources[0], &strategies, &train, config.folds)?)
        }
        Experiment::Transfer => {
            let mut cells = Vec::new();
            for s in &strategies {
                cells.extend(transfer_matrix(&sources, s, &train, config.folds)?);
            }
            Results::Transfer(cells)
        }
        Experiment::Sweep => {
            let native = by_tag(&sources, config.sweep.native.as_deref().unwrap_or(&sources[0].tag));
            let transfer = config.sweep.transfer.as_deref().map(|t| by_tag(&sources, t));
            Results::Sweep(sampling_sweep(native, transfer, &strategies, &train, &config.sweep_settings())?)
        }
        Experiment::Overlap => {
            for s in &sources {
                models.insert(s.tag.clone(), train_full(s, &strategies[0], &train)?);
            }
            Results::Overlap(overlap_table(&models, config.overlap.k)?)
        }
    };

    let run_dir = if config.output_dir.is_absolute() { config.output_dir.clone() } else { output_root.join(&config.output_dir) };
    mkdir(&run_dir.join("figures"))?;
    emit_report(&results, ReportFormat::Csv, &run_dir.join("report.csv"))?;
    emit_report(&results, ReportFormat::Json, &run_dir.join("report.json"))?;
    let mut figures = Vec::new();
    for &f in results.figure_formats() {
        let name = format!("figures/{}.svg", results.kind());
        emit_report(&results, f, &run_dir.join(&name))?;
        figures.push(name);
    }
    let mut model_files = Vec::new();
    if !models.is_empty() {
        mkdir(&run_dir.join("models"))?;
        for (tag, m) in &models {
            let name = format!("models/{tag}.json");
            write(&run_dir.join(&name), &(m.to_json()? + "\n"))?;
            model_files.push(name);
        }
    }
    let seeds: Vec<u64> = match config.experiment {
        Experiment::Sweep => (0..config.sweep.seeds as u64).map(|i| config.seed.wrapping_add(i)).collect(),
        _ => vec![config.seed],
    };
    let outputs: Vec<String> =
        ["report.csv", "report.json"].into_iter().map(String::from).chain(figures).chain(model_files).collect();
    let manifest = json!({
        "toolkit_version": crate::TOOLKIT_VERSION,
        "experiment": config.experiment.as_str(),
        "config_sha256": hash,
        "model": config.model,
        "seeds": seeds,
        "folds": config.folds,
        "strategies": strategies.iter().map(crate::classifier::Featurizer::name).collect::<Vec<_>>(),
        "inputs": inputs.iter().map(|i| json!({
            "tag": i.source.tag,
            "sha256": i.sha256,
            "records": i.source.dataset.len(),
            "sae_width": i.source.dataset.manifest.sae_width,
            "layer_index": i.source.dataset.manifest.layer_index,
        })).collect::<Vec<_>>(),
        "outputs": outputs,
    });
    write(&run_dir.join("run_manifest.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(RunOutcome { run_dir, results })
}
