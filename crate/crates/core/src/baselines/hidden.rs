use crate::error::{Error, Result};
use crate::pooling::{PooledMatrix, Rows};
use crate::store::Dataset;

/// Dense matrix of the stored last-token hidden states, unmodified.
pub fn hidden_state_features(dataset: &Dataset) -> Result<PooledMatrix> {
    let positions: Vec<usize> = (0..dataset.len()).collect();
    hidden_state_rows(dataset, &positions)
}

/// Hidden-state rows for the records at `positions`.
pub fn hidden_state_rows(dataset: &Dataset, positions: &[usize]) -> Result<PooledMatrix> {
    let mut rows = Vec::with_capacity(positions.len());
    for &p in positions {
        let r = &dataset.records[p];
        let h = r
            .last_hidden
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("example {} lacks hidden state", r.example_id)))?;
        rows.push(h.iter().map(|&v| f64::from(v)).collect());
    }
    Ok(PooledMatrix::from_records(Rows::Dense(rows), dataset, positions, dataset.manifest.hidden_dim))
}
