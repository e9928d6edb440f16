//! JSON Lines interchange: the manifest on the first line, one record per
//! following line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Dataset, DumpManifest, ExampleRecord};
use crate::error::{Error, Result};

pub fn export_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    dataset.validate()?;
    let io = |e| Error::io("<jsonl output>", e);
    serde_json::to_writer(&mut out, &dataset.manifest)?;
    out.write_all(b"\n").map_err(io)?;
    for r in &dataset.records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn import_jsonl<R: BufRead>(input: R) -> Result<Dataset> {
    let mut lines = input.lines().enumerate();
    let manifest: DumpManifest = loop {
        match lines.next() {
            Some((n, line)) => {
                let line = line.map_err(|e| Error::io("<jsonl input>", e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line)
                    .map_err(|e| Error::Config(format!("line {}: manifest: {e}", n + 1)))?;
            }
            None => return Err(Error::Config("JSON Lines input is empty (expected a manifest line)".into())),
        }
    };
    let mut records = Vec::new();
    for (n, line) in lines {
        let line = line.map_err(|e| Error::io("<jsonl input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExampleRecord =
            serde_json::from_str(&line).map_err(|e| Error::Config(format!("line {}: record: {e}", n + 1)))?;
        records.push(record);
    }
    Dataset::new(manifest, records)
}

pub fn write_jsonl(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    export_jsonl(dataset, BufWriter::new(file))
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    import_jsonl(BufReader::new(file))
}
