//! The `sae-probe` command line.

mod config;
mod run;

pub use config::{ClassifierBlock, DumpEntry, Experiment, OverlapBlock, RunConfig, SweepBlock};
pub use run::{execute, RunOutcome};

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::harness::{emit_report, generate_synthetic, synthetic_texts, ReportFormat, Results, SyntheticSpec};
use crate::pooling::{pool_dataset, PoolingStrategy};
use crate::store::{read_dump, read_jsonl, write_dump, write_jsonl, Dataset};

/// Environment variable overriding the default output root.
pub const OUTPUT_ROOT_ENV: &str = "SAE_PROBE_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "sae-probe", version, about = "Linear probes over pooled sparse autoencoder activations")]
pub struct Cli {
    /// Maximum worker threads (default: logical core count).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dump against every format invariant.
    Validate {
        dump: PathBuf,
    },
    /// Convert between the binary dump and JSON Lines.
    Convert(ConvertArgs),
    /// Generate a synthetic dump from a spec file (TOML, or JSON by extension).
    Synth(SynthArgs),
    /// Pool a dump into one vector per example.
    Pool(PoolArgs),
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Re-render a saved report.json.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Binary,
    Jsonl,
}

impl DumpFormat {
    fn infer(path: &Path) -> Self {
        if path.extension().is_some_and(|e| e == "jsonl" || e == "json") {
            DumpFormat::Jsonl
        } else {
            DumpFormat::Binary
        }
    }
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Input format (default: from extension, `.jsonl` is JSON Lines).
    #[arg(long = "from", value_enum)]
    pub from: Option<DumpFormat>,
    /// Output format (default: from extension).
    #[arg(long = "to", value_enum)]
    pub to: Option<DumpFormat>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub spec: PathBuf,
    /// Output dump path.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write a synthetic text sidecar here.
    #[arg(long)]
    pub texts: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    pub dump: PathBuf,
    /// Keep only the N strongest features of each token before summing (0 = all).
    #[arg(long, default_value_t = 0)]
    pub top_n: usize,
    /// Binarize the pooled vector.
    #[arg(long, conflicts_with = "raw")]
    pub binarize: bool,
    /// Keep raw pooled sums (the default).
    #[arg(long)]
    pub raw: bool,
    /// Binarization threshold; a feature is active when its sum exceeds it.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    pub format: MatrixFormat,
    /// Output path (default: standard output).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Root for relative `output_dir` values.
    #[arg(long, env = OUTPUT_ROOT_ENV, default_value = "runs")]
    pub output_root: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report.json written by `run`.
    pub results: PathBuf,
    /// csv, json, svg_bar or svg_line.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(short, long)]
    pub out: PathBuf,
}

fn read_any(path: &Path, format: Option<DumpFormat>) -> Result<Dataset> {
    match format.unwrap_or_else(|| DumpFormat::infer(path)) {
        DumpFormat::Binary => read_dump(path),
        DumpFormat::Jsonl => read_jsonl(path),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn load_spec(path: &Path) -> Result<SyntheticSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: SyntheticSpec = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_validate(path: &Path) -> Result<()> {
    let d = read_any(path, None)?;
    println!(
        "ok: {} records, width {}, {} classes, model {} layer {}",
        d.len(),
        d.width(),
        d.class_count(),
        d.manifest.model_id,
        d.manifest.layer_index
    );
    Ok(())
}

fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let d = read_any(&args.input, args.from)?;
    match args.to.unwrap_or_else(|| DumpFormat::infer(&args.output)) {
        DumpFormat::Binary => write_dump(&d, &args.output),
        DumpFormat::Jsonl => write_jsonl(&d, &args.output),
    }?;
    eprintln!("wrote {} records to {}", d.len(), args.output.display());
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let d = generate_synthetic(&spec)?;
    write_dump(&d, &args.out)?;
    if let Some(t) = &args.texts {
        synthetic_texts(&d).write(t)?;
    }
    eprintln!("wrote {} records to {}", d.len(), args.out.display());
    Ok(())
}

fn cmd_pool(args: &PoolArgs) -> Result<()> {
    let d = read_any(&args.dump, None)?;
    let strategy = PoolingStrategy { top_n: args.top_n, binarize: args.binarize, threshold: args.threshold };
    strategy.validate()?;
    let m = pool_dataset(&d, &strategy)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match args.format {
        MatrixFormat::Csv => m.write_csv(&mut out)?,
        MatrixFormat::Json => {
            serde_json::to_writer(&mut out, &m.to_sparse_json())?;
            out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        }
    }
    out.flush().map_err(|e| Error::io("<output>", e))
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let text = std::fs::read_to_string(&args.results).map_err(|e| Error::io(&args.results, e))?;
    let results: Results = serde_json::from_str(&text)?;
    emit_report(&results, format, &args.out)
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::InvalidArgument("--jobs must be positive".into()));
        }
        // Fails only when a pool already exists, which keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Validate { dump } => cmd_validate(dump),
        Command::Convert(a) => cmd_convert(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Pool(a) => cmd_pool(a),
        Command::Run(a) => {
            let outcome = execute(&a.config, &a.output_root)?;
            println!("{}", outcome.run_dir.display());
            Ok(())
        }
        Command::Report(a) => cmd_report(a),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
