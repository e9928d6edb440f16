//! Little-endian binary dump codec.
//!
//! Layout:
//!
//! ```text
//! "SAED"  u32 version  u32 manifest_len  manifest (UTF-8 JSON)  u64 record_count
//! per record:
//!   u64 example_id  u32 token_count
//!   per token: u32 entry_count, entry_count x (u32 index, f32 value)
//!   u8 has_hidden  [hidden_dim x f32]
//!   u32 label  u32 language_len  language (UTF-8, length 0 = absent)
//! ```

use std::fs;
use std::path::Path;

use super::{Dataset, DumpManifest, ExampleRecord, SparseTokenFeatures};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SAED";
pub const FORMAT_VERSION: u32 = 1;

/// Validates `dataset` and writes it to `path`.
pub fn write_dump(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_dump(dataset)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads and fully validates the dump at `path`.
pub fn read_dump(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dump(&bytes)
}

pub fn encode_dump(dataset: &Dataset) -> Result<Vec<u8>> {
    dataset.validate()?;
    let manifest = serde_json::to_vec(&dataset.manifest)?;
    let payload: usize = dataset
        .records
        .iter()
        .map(|r| {
            let tokens: usize = r.tokens.iter().map(|t| 4 + 8 * t.len()).sum();
            let hidden = r.last_hidden.as_ref().map_or(0, |h| 4 * h.len());
            25 + tokens + hidden + r.language.as_ref().map_or(0, String::len)
        })
        .sum();
    let mut out = Vec::with_capacity(20 + manifest.len() + payload);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_len(&mut out, manifest.len())?;
    out.extend_from_slice(&manifest);
    out.extend_from_slice(&(dataset.records.len() as u64).to_le_bytes());
    for r in &dataset.records {
        out.extend_from_slice(&r.example_id.to_le_bytes());
        put_len(&mut out, r.tokens.len())?;
        for token in &r.tokens {
            put_len(&mut out, token.len())?;
            for &(index, value) in &token.entries {
                out.extend_from_slice(&index.to_le_bytes());
                out.extend_from_slice(&value.to_le_bytes());
            }
        }
        match &r.last_hidden {
            Some(h) => {
                out.push(1);
                for v in h {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            None => out.push(0),
        }
        out.extend_from_slice(&r.label.to_le_bytes());
        let lang = r.language.as_deref().unwrap_or("");
        put_len(&mut out, lang.len())?;
        out.extend_from_slice(lang.as_bytes());
    }
    Ok(out)
}

fn put_len(out: &mut Vec<u8>, len: usize) -> Result<()> {
    let len = u32::try_from(len).map_err(|_| Error::InvalidArgument(format!("length {len} does not fit in u32")))?;
    out.extend_from_slice(&len.to_le_bytes());
    Ok(())
}

/// Decodes a dump from memory and validates it.
pub fn decode_dump(bytes: &[u8]) -> Result<Dataset> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 4 {
        return Err(Error::Truncated { offset: bytes.len() as u64, context: "magic" });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    cur.pos = 4;
    let version = cur.u32("format version")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: version, supported: FORMAT_VERSION });
    }
    let manifest_len = cur.u32("manifest length")? as usize;
    let manifest_at = cur.pos;
    let manifest_bytes = cur.take(manifest_len, "manifest")?;
    let manifest: DumpManifest = serde_json::from_slice(manifest_bytes).map_err(|e| Error::Malformed {
        offset: manifest_at as u64,
        message: format!("manifest JSON: {e}"),
    })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: manifest.format_version, supported: FORMAT_VERSION });
    }
    let count = cur.u64("record count")?;
    // Each record occupies at least 21 bytes; never trust the count for allocation.
    let capacity = (count as usize).min(cur.remaining() / 21);
    let mut records = Vec::with_capacity(capacity);
    for _ in 0..count {
        records.push(read_record(&mut cur, manifest.hidden_dim)?);
    }
    if cur.remaining() != 0 {
        return Err(Error::Malformed {
            offset: cur.pos as u64,
            message: format!("{} trailing bytes after the last record", cur.remaining()),
        });
    }
    let dataset = Dataset { manifest, records };
    dataset.validate()?;
    Ok(dataset)
}

fn read_record(cur: &mut Cursor<'_>, hidden_dim: usize) -> Result<ExampleRecord> {
    let example_id = cur.u64("example_id")?;
    let token_count = cur.u32("token count")? as usize;
    let mut tokens = Vec::with_capacity(token_count.min(cur.remaining() / 4));
    for _ in 0..token_count {
        let n = cur.u32("token entry count")? as usize;
        let raw = cur.take(n.saturating_mul(8), "token entries")?;
        let entries = raw
            .chunks_exact(8)
            .map(|c| {
                (
                    u32::from_le_bytes(c[..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..].try_into().unwrap()),
                )
            })
            .collect();
        tokens.push(SparseTokenFeatures { entries });
    }
    let flag_at = cur.pos;
    let last_hidden = match cur.u8("hidden-state flag")? {
        0 => None,
        1 => {
            let raw = cur.take(hidden_dim.saturating_mul(4), "hidden state")?;
            Some(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
        }
        other => {
            return Err(Error::Malformed {
                offset: flag_at as u64,
                message: format!("hidden-state flag must be 0 or 1, found {other}"),
            })
        }
    };
    let label = cur.u32("label")?;
    let lang_len = cur.u32("language length")? as usize;
    let lang_at = cur.pos;
    let lang = cur.take(lang_len, "language tag")?;
    let language = if lang.is_empty() {
        None
    } else {
        Some(String::from_utf8(lang.to_vec()).map_err(|_| Error::Malformed {
            offset: lang_at as u64,
            message: "language tag is not UTF-8".into(),
        })?)
    };
    Ok(ExampleRecord { example_id, tokens, last_hidden, label, language })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize, context: &'static str) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::Truncated { offset: self.bytes.len() as u64, context });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, context: &'static str) -> Result<u8> {
        Ok(self.take(1, context)?[0])
    }

    fn u32(&mut self, context: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, context)?.try_into().unwrap()))
    }

    fn u64(&mut self, context: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, context)?.try_into().unwrap()))
    }
}
