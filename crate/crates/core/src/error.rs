use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Maximum number of invariant violations carried in a [`ValidationReport`].
pub const MAX_REPORTED_VIOLATIONS: usize = 10;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected \"SAED\", found {found:02x?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported dump format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("truncated dump: unexpected end of data at byte offset {offset} while reading {context}")]
    Truncated { offset: u64, context: &'static str },

    #[error("malformed dump at byte offset {offset}: {message}")]
    Malformed { offset: u64, message: String },

    #[error(transparent)]
    Validation(#[from] ValidationReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("training did not converge within {iterations} iterations (gradient inf-norm {gradient_norm:.3e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for validation and configuration problems, 2 for
    /// runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::Truncated { .. }
            | Error::Malformed { .. }
            | Error::Validation(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch(_)
            | Error::Config(_) => 1,
            Error::Io { .. } | Error::NonConvergence { .. } | Error::Json(_) => 2,
        }
    }
}

/// One broken invariant, attributed to a record when possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub example_id: Option<u64>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.example_id {
            Some(id) => write!(f, "example {id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// The first [`MAX_REPORTED_VIOLATIONS`] violations plus the total count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub total: usize,
}

impl ValidationReport {
    pub fn push(&mut self, example_id: Option<u64>, message: impl Into<String>) {
        self.total += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(Violation {
                example_id,
                message: message.into(),
            });
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }

    /// Ids of the records named by the reported violations, deduplicated.
    pub fn example_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.violations.iter().filter_map(|v| v.example_id).collect();
        ids.dedup();
        ids
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} invariant violation(s)", self.total)?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        if self.total > self.violations.len() {
            write!(f, "\n  ... and {} more", self.total - self.violations.len())?;
        }
        Ok(())
    }
}
