//! Token aggregation: per-token top-N masking, summation and binarization.
//!
//! The order is fixed: mask each token to its `top_n` strongest entries,
//! sum over tokens, then (optionally) keep the coordinates whose pooled
//! value exceeds the threshold.

mod matrix;

pub use matrix::{MatrixMeta, PooledMatrix, RowIter, Rows};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{Dataset, ExampleRecord};

/// Sparse pooled sequence vector; indices strictly increasing, values > 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PooledVector {
    pub width: usize,
    pub entries: Vec<(u32, f64)>,
}

impl PooledVector {
    pub fn support(&self) -> Vec<u32> {
        self.entries.iter().map(|&(i, _)| i).collect()
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }
}

/// Set of active feature indices, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryVector {
    pub width: usize,
    pub active: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoolingStrategy {
    /// Entries kept per token before summation; 0 keeps everything.
    pub top_n: usize,
    pub binarize: bool,
    pub threshold: f64,
}

impl Default for PoolingStrategy {
    fn default() -> Self {
        PoolingStrategy { top_n: 0, binarize: true, threshold: 1.0 }
    }
}

impl PoolingStrategy {
    pub fn new(top_n: usize, binarize: bool) -> Self {
        PoolingStrategy { top_n, binarize, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() {
            return Err(Error::InvalidArgument(format!("binarization threshold must be finite, got {}", self.threshold)));
        }
        Ok(())
    }

    /// Short stable name, e.g. `full_sae_binarized` or `top20_raw`.
    pub fn name(&self) -> String {
        let prefix = if self.top_n == 0 { "full_sae".to_string() } else { format!("top{}", self.top_n) };
        let suffix = if self.binarize { "binarized" } else { "raw" };
        if self.binarize && self.threshold != 1.0 {
            format!("{prefix}_{suffix}_t{}", self.threshold)
        } else {
            format!("{prefix}_{suffix}")
        }
    }
}

/// Sums sorted `(index, value)` entries that share an index. Sorting is
/// stable, so equal indices accumulate in input order.
fn accumulate(mut entries: Vec<(u32, f64)>, width: usize) -> PooledVector {
    entries.sort_by_key(|&(i, _)| i);
    let mut out: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
    for (i, v) in entries {
        match out.last_mut() {
            Some((last, acc)) if *last == i => *acc += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    PooledVector { width, entries: out }
}

/// Summation pooling: `F[i] = Σ_t f_t[i]`.
pub fn sum_pool(example: &ExampleRecord, width: usize) -> PooledVector {
    let entries = example
        .tokens
        .iter()
        .flat_map(|t| t.entries.iter().map(|&(i, v)| (i, f64::from(v))))
        .collect();
    accumulate(entries, width)
}

/// Keeps the `n` largest entries of each token (ties to the lower index),
/// then sums. `n = 0` disables masking.
pub fn topn_token_pool(example: &ExampleRecord, n: usize, width: usize) -> PooledVector {
    if n == 0 {
        return sum_pool(example, width);
    }
    let mut entries = Vec::new();
    let mut scratch: Vec<(u32, f32)> = Vec::new();
    for token in &example.tokens {
        if token.entries.len() <= n {
            entries.extend(token.entries.iter().map(|&(i, v)| (i, f64::from(v))));
            continue;
        }
        scratch.clear();
        scratch.extend_from_slice(&token.entries);
        scratch.select_nth_unstable_by(n - 1, |a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        entries.extend(scratch[..n].iter().map(|&(i, v)| (i, f64::from(v))));
    }
    accumulate(entries, width)
}

/// Index `i` is active iff `F[i] > threshold` (strict).
pub fn binarize(vector: &PooledVector, threshold: f64) -> BinaryVector {
    BinaryVector {
        width: vector.width,
        active: vector.entries.iter().filter(|&&(_, v)| v > threshold).map(|&(i, _)| i).collect(),
    }
}

/// Pools every record of `dataset`, preserving record order.
pub fn pool_dataset(dataset: &Dataset, strategy: &PoolingStrategy) -> Result<PooledMatrix> {
    let positions: Vec<usize> = (0..dataset.len()).collect();
    pool_records(dataset, &positions, strategy)
}

/// Pools the records at `positions`, in that order.
pub fn pool_records(dataset: &Dataset, positions: &[usize], strategy: &PoolingStrategy) -> Result<PooledMatrix> {
    strategy.validate()?;
    let width = dataset.width();
    let pooled: Vec<PooledVector> = positions
        .par_iter()
        .map(|&p| topn_token_pool(&dataset.records[p], strategy.top_n, width))
        .collect();
    let rows = if strategy.binarize {
        Rows::Binary(pooled.iter().map(|v| binarize(v, strategy.threshold)).collect())
    } else {
        Rows::Sparse(pooled)
    };
    let mut matrix = PooledMatrix::from_records(rows, dataset, positions, width);
    matrix.strategy = Some(*strategy);
    Ok(matrix)
}

/// Zeroes every feature that is nonzero in more than `max_count` rows.
pub fn filter_overrepresented(matrix: &PooledMatrix, max_count: usize) -> (PooledMatrix, BTreeSet<u32>) {
    let counts = matrix.column_occurrences();
    let removed: BTreeSet<u32> =
        counts.iter().enumerate().filter(|&(_, &c)| c > max_count).map(|(i, _)| i as u32).collect();
    if removed.is_empty() {
        return (matrix.clone(), removed);
    }
    let keep = |i: u32| !removed.contains(&i);
    let rows = match &matrix.rows {
        Rows::Sparse(rows) => Rows::Sparse(
            rows.iter()
                .map(|r| PooledVector {
                    width: r.width,
                    entries: r.entries.iter().copied().filter(|&(i, _)| keep(i)).collect(),
                })
                .collect(),
        ),
        Rows::Binary(rows) => Rows::Binary(
            rows.iter()
                .map(|r| BinaryVector { width: r.width, active: r.active.iter().copied().filter(|&i| keep(i)).collect() })
                .collect(),
        ),
        Rows::Dense(rows) => Rows::Dense(
            rows.iter()
                .map(|r| {
                    let mut r = r.clone();
                    for &i in &removed {
                        r[i as usize] = 0.0;
                    }
                    r
                })
                .collect(),
        ),
    };
    (PooledMatrix { rows, ..matrix.clone() }, removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::test_support::*;
    use proptest::prelude::*;

    fn ex(tokens: Vec<Vec<(u32, f32)>>) -> ExampleRecord {
        record(0, 0, tokens)
    }

    #[test]
    fn sum_pool_examples() {
        let e = ex(vec![vec![(2, 1.0), (5, 0.5)], vec![(2, 0.25)]]);
        assert_eq!(sum_pool(&e, 16).entries, vec![(2, 1.25), (5, 0.5)]);
        assert_eq!(sum_pool(&ex(vec![vec![(0, 3.0)]]), 16).entries, vec![(0, 3.0)]);
    }

    #[test]
    fn hundred_small_tokens() {
        let e = ex(vec![vec![(7, 0.01)]; 100]);
        let p = sum_pool(&e, 16);
        // Oracle: the f32 value 0.01 widened to f64, times 100.
        let expected = 100.0 * f64::from(0.01f32);
        assert!((p.get(7) - expected).abs() < 1e-9);
        assert!((p.get(7) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn topn_examples() {
        let e = ex(vec![vec![(1, 3.0), (4, 2.0), (7, 1.0)]]);
        assert_eq!(topn_token_pool(&e, 2, 16).entries, vec![(1, 3.0), (4, 2.0)]);
        let ties = ex(vec![vec![(1, 2.0), (2, 2.0), (3, 2.0)]]);
        assert_eq!(topn_token_pool(&ties, 2, 16).entries, vec![(1, 2.0), (2, 2.0)]);
        let e2 = ex(vec![vec![(1, 3.0), (4, 2.0)], vec![(9, 0.5)]]);
        assert_eq!(topn_token_pool(&e2, 0, 16), sum_pool(&e2, 16));
        assert_eq!(topn_token_pool(&e2, 5, 16), sum_pool(&e2, 16));
    }

    #[test]
    fn binarize_examples() {
        let v = PooledVector { width: 16, entries: vec![(2, 1.25), (5, 0.5)] };
        assert_eq!(binarize(&v, 1.0).active, vec![2]);
        let edge = PooledVector { width: 16, entries: vec![(3, 1.0)] };
        assert!(binarize(&edge, 1.0).active.is_empty());
        assert!(binarize(&PooledVector { width: 4, entries: vec![] }, 1.0).active.is_empty());
    }

    #[test]
    fn pool_dataset_compositions() {
        let ds = two_record_dataset();
        let m = pool_dataset(&ds, &PoolingStrategy::default()).unwrap();
        match &m.rows {
            Rows::Binary(rows) => {
                assert_eq!(rows.len(), 2);
                assert_eq!(rows[0].active, vec![2]);
                assert_eq!(rows[1].active, vec![0]);
            }
            _ => panic!("expected binary rows"),
        }
        let raw = pool_dataset(&ds, &PoolingStrategy::new(0, false)).unwrap();
        match &raw.rows {
            Rows::Sparse(rows) => {
                for (row, r) in rows.iter().zip(&ds.records) {
                    assert_eq!(row, &sum_pool(r, 16));
                }
            }
            _ => panic!("expected sparse rows"),
        }
        assert_eq!(m, pool_dataset(&ds, &PoolingStrategy::default()).unwrap());
        assert_eq!(m.labels, vec![0, 1]);
        assert_eq!(m.example_ids, vec![0, 1]);
    }

    #[test]
    fn non_finite_threshold_rejected() {
        let s = PoolingStrategy { threshold: f64::NAN, ..Default::default() };
        assert!(pool_dataset(&two_record_dataset(), &s).is_err());
    }

    #[test]
    fn filter_removes_always_on_feature() {
        let rows: Vec<BinaryVector> =
            (0..1000).map(|i| BinaryVector { width: 16, active: if i % 2 == 0 { vec![3, 9] } else { vec![9] } }).collect();
        let m = PooledMatrix::new(Rows::Binary(rows), vec![0; 1000], 16, MatrixMeta::anonymous(1));
        let (filtered, removed) = filter_overrepresented(&m, 999);
        assert_eq!(removed.into_iter().collect::<Vec<_>>(), vec![9]);
        assert_eq!(filtered.column_occurrences()[9], 0);
        assert_eq!(filtered.column_occurrences()[3], 500);
        let (same, none) = filter_overrepresented(&m, 1000);
        assert!(none.is_empty());
        assert_eq!(same, m);
    }

    #[test]
    fn strategy_names() {
        assert_eq!(PoolingStrategy::default().name(), "full_sae_binarized");
        assert_eq!(PoolingStrategy::new(0, false).name(), "full_sae_raw");
        assert_eq!(PoolingStrategy::new(20, true).name(), "top20_binarized");
    }

    fn arb_example() -> impl Strategy<Value = ExampleRecord> {
        let token = prop::collection::btree_map(0u32..64, 0.01f32..4.0, 0..12)
            .prop_map(|m| m.into_iter().collect::<Vec<_>>());
        prop::collection::vec(token, 1..8).prop_map(ex)
    }

    fn close(a: &PooledVector, b: &PooledVector) -> bool {
        a.support() == b.support() && a.entries.iter().zip(&b.entries).all(|(x, y)| (x.1 - y.1).abs() <= 1e-9)
    }

    proptest! {
        #[test]
        fn sum_pool_permutation_invariant(e in arb_example(), seed: u64) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = e.clone();
            shuffled.tokens.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(close(&sum_pool(&e, 64), &sum_pool(&shuffled, 64)));
        }

        #[test]
        fn topn_monotone_in_n(e in arb_example(), n1 in 0usize..6, extra in 0usize..6) {
            let n1 = n1 + 1;
            let n2 = n1 + extra;
            let small = topn_token_pool(&e, n1, 64);
            let large = topn_token_pool(&e, n2, 64);
            for &(i, v) in &small.entries {
                prop_assert!(large.get(i) >= v - 1e-12);
            }
        }

        #[test]
        fn support_bound_and_linearity(a in arb_example(), b in arb_example()) {
            let pa = sum_pool(&a, 64);
            let union: BTreeSet<u32> = a.tokens.iter().flat_map(|t| t.entries.iter().map(|e| e.0)).collect();
            let total: usize = a.tokens.iter().map(|t| t.len()).sum();
            prop_assert_eq!(pa.entries.len(), union.len());
            prop_assert!(pa.entries.len() <= total);
            let mut joined = a.clone();
            joined.tokens.extend(b.tokens.iter().cloned());
            let pj = sum_pool(&joined, 64);
            let pb = sum_pool(&b, 64);
            for i in 0..64u32 {
                prop_assert!((pj.get(i) - pa.get(i) - pb.get(i)).abs() <= 1e-9);
            }
        }

        #[test]
        fn binarize_idempotent(active in prop::collection::btree_set(0u32..64, 0..20), t in 0.0f64..1.0) {
            let v = PooledVector { width: 64, entries: active.iter().map(|&i| (i, 1.0)).collect() };
            let once = binarize(&v, t);
            prop_assert_eq!(&once.active, &active.iter().copied().collect::<Vec<_>>());
            prop_assert!(binarize(&v, 1.0).active.is_empty());
        }
    }
}
