use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw text per example, stored next to a dump as JSON Lines of
/// `{"example_id": .., "text": ..}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextSidecar {
    pub texts: BTreeMap<u64, String>,
}

#[derive(Serialize, Deserialize)]
struct Line<'a> {
    example_id: u64,
    text: std::borrow::Cow<'a, str>,
}

impl TextSidecar {
    pub fn get(&self, example_id: u64) -> Option<&str> {
        self.texts.get(&example_id).map(String::as_str)
    }

    pub fn insert(&mut self, example_id: u64, text: impl Into<String>) {
        self.texts.insert(example_id, text.into());
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn from_reader<R: BufRead>(input: R) -> Result<Self> {
        let mut texts = BTreeMap::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<text sidecar>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line<'_> =
                serde_json::from_str(&line).map_err(|e| Error::Config(format!("text sidecar line {}: {e}", n + 1)))?;
            if texts.insert(parsed.example_id, parsed.text.into_owned()).is_some() {
                return Err(Error::Config(format!("text sidecar line {}: duplicate example_id {}", n + 1, parsed.example_id)));
            }
        }
        Ok(TextSidecar { texts })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn to_writer<W: Write>(&self, mut out: W) -> Result<()> {
        for (&example_id, text) in &self.texts {
            serde_json::to_writer(&mut out, &Line { example_id, text: text.into() })?;
            out.write_all(b"\n").map_err(|e| Error::io("<text sidecar>", e))?;
        }
        out.flush().map_err(|e| Error::io("<text sidecar>", e))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_duplicates() {
        let mut s = TextSidecar::default();
        s.insert(3, "héllo \"world\"");
        s.insert(1, "a b");
        let mut buf = Vec::new();
        s.to_writer(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("{\"example_id\":1,"));
        assert_eq!(TextSidecar::from_reader(buf.as_slice()).unwrap(), s);
        let dup = "{\"example_id\":1,\"text\":\"a\"}\n{\"example_id\":1,\"text\":\"b\"}\n";
        assert!(TextSidecar::from_reader(dup.as_bytes()).is_err());
    }
}
