use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{BinaryVector, PoolingStrategy, PooledVector};
use crate::error::{Error, Result};
use crate::store::Dataset;

/// Row storage. All rows of a matrix share one representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Rows {
    Sparse(Vec<PooledVector>),
    Binary(Vec<BinaryVector>),
    Dense(Vec<Vec<f64>>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Sparse(r) => r.len(),
            Rows::Binary(r) => r.len(),
            Rows::Dense(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub label_names: Vec<String>,
    pub task: String,
    pub language: Option<String>,
}

impl MatrixMeta {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        MatrixMeta {
            label_names: dataset.manifest.label_names.clone(),
            task: dataset.manifest.task_name.clone(),
            language: dataset.manifest.language.clone(),
        }
    }

    /// Labels named `"0"`, `"1"`, ... with no task or language.
    pub fn anonymous(class_count: usize) -> Self {
        MatrixMeta { label_names: (0..class_count).map(|c| c.to_string()).collect(), task: String::new(), language: None }
    }
}

/// Dataset-level feature matrix: one pooled row per example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledMatrix {
    pub rows: Rows,
    pub labels: Vec<usize>,
    pub example_ids: Vec<u64>,
    /// Number of columns.
    pub width: usize,
    pub meta: MatrixMeta,
    pub strategy: Option<PoolingStrategy>,
    /// Original feature index of each column, set by projection.
    pub column_map: Option<Vec<u32>>,
}

/// Nonzero `(column, value)` pairs of one row.
pub enum RowIter<'a> {
    Sparse(std::slice::Iter<'a, (u32, f64)>),
    Binary(std::slice::Iter<'a, u32>),
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    #[inline]
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Sparse(it) => it.next().map(|&(i, v)| (i as usize, v)),
            RowIter::Binary(it) => it.next().map(|&i| (i as usize, 1.0)),
            RowIter::Dense(it) => it.find(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)),
        }
    }
}

impl PooledMatrix {
    /// Matrix with example ids `0..rows.len()`.
    pub fn new(rows: Rows, labels: Vec<usize>, width: usize, meta: MatrixMeta) -> Self {
        let example_ids = (0..rows.len() as u64).collect();
        PooledMatrix { rows, labels, example_ids, width, meta, strategy: None, column_map: None }
    }

    /// Matrix whose rows correspond to `dataset.records[positions[i]]`.
    pub fn from_records(rows: Rows, dataset: &Dataset, positions: &[usize], width: usize) -> Self {
        PooledMatrix {
            rows,
            labels: positions.iter().map(|&p| dataset.records[p].label()).collect(),
            example_ids: positions.iter().map(|&p| dataset.records[p].example_id).collect(),
            width,
            meta: MatrixMeta::from_dataset(dataset),
            strategy: None,
            column_map: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.meta.label_names.len()
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.rows, Rows::Binary(_))
    }

    pub fn row(&self, i: usize) -> RowIter<'_> {
        match &self.rows {
            Rows::Sparse(r) => RowIter::Sparse(r[i].entries.iter()),
            Rows::Binary(r) => RowIter::Binary(r[i].active.iter()),
            Rows::Dense(r) => RowIter::Dense(r[i].iter().enumerate()),
        }
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        for (j, v) in self.row(i) {
            out[j] = v;
        }
        out
    }

    pub fn nnz(&self) -> usize {
        (0..self.len()).map(|i| self.row(i).count()).sum()
    }

    /// Number of rows in which each column is nonzero.
    pub fn column_occurrences(&self) -> Vec<usize> {
        let mut counts = vec![0; self.width];
        for i in 0..self.len() {
            for (j, _) in self.row(i) {
                counts[j] += 1;
            }
        }
        counts
    }

    /// Original feature index of column `col`.
    pub fn original_index(&self, col: usize) -> u32 {
        match &self.column_map {
            Some(map) => map[col],
            None => col as u32,
        }
    }

    /// Rows at `positions`, in that order.
    pub fn select_rows(&self, positions: &[usize]) -> PooledMatrix {
        let rows = match &self.rows {
            Rows::Sparse(r) => Rows::Sparse(positions.iter().map(|&p| r[p].clone()).collect()),
            Rows::Binary(r) => Rows::Binary(positions.iter().map(|&p| r[p].clone()).collect()),
            Rows::Dense(r) => Rows::Dense(positions.iter().map(|&p| r[p].clone()).collect()),
        };
        PooledMatrix {
            rows,
            labels: positions.iter().map(|&p| self.labels[p]).collect(),
            example_ids: positions.iter().map(|&p| self.example_ids[p]).collect(),
            width: self.width,
            meta: self.meta.clone(),
            strategy: self.strategy,
            column_map: self.column_map.clone(),
        }
    }

    /// Shape and value checks shared by the classifier entry points.
    pub fn check(&self) -> Result<()> {
        if self.labels.len() != self.len() || self.example_ids.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows but {} labels and {} example ids",
                self.len(),
                self.labels.len(),
                self.example_ids.len()
            )));
        }
        let classes = self.class_count();
        if let Some(&l) = self.labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidArgument(format!("label {l} >= class count {classes}")));
        }
        for i in 0..self.len() {
            if let Rows::Dense(r) = &self.rows {
                if r[i].len() != self.width {
                    return Err(Error::DimensionMismatch(format!("row {i} has length {} != width {}", r[i].len(), self.width)));
                }
            }
            for (j, v) in self.row(i) {
                if j >= self.width {
                    return Err(Error::DimensionMismatch(format!("row {i} has column {j} >= width {}", self.width)));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("row {i} column {j} is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Dense CSV: `example_id,label,f<index>...`, one line per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<csv output>", e);
        let mut header = String::from("example_id,label");
        for c in 0..self.width {
            header.push_str(&format!(",f{}", self.original_index(c)));
        }
        writeln!(out, "{header}").map_err(io)?;
        for i in 0..self.len() {
            let mut line = format!("{},{}", self.example_ids[i], self.labels[i]);
            let dense = self.dense_row(i);
            for v in dense {
                if self.is_binary() {
                    line.push_str(if v != 0.0 { ",1" } else { ",0" });
                } else {
                    line.push_str(&format!(",{v}"));
                }
            }
            writeln!(out, "{line}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Sparse JSON form: each row as `[[index, value], ...]`.
    pub fn to_sparse_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.len())
            .map(|i| {
                let entries: Vec<serde_json::Value> = if self.is_binary() {
                    self.row(i).map(|(j, _)| json!([self.original_index(j), 1])).collect()
                } else {
                    self.row(i).map(|(j, v)| json!([self.original_index(j), v])).collect()
                };
                json!({ "example_id": self.example_ids[i], "label": self.labels[i], "entries": entries })
            })
            .collect();
        json!({
            "width": self.width,
            "binary": self.is_binary(),
            "label_names": self.meta.label_names,
            "task": self.meta.task,
            "language": self.meta.language,
            "strategy": self.strategy,
            "rows": rows,
        })
    }
}
