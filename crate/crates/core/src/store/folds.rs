//! Stratified fold assignment and subsampling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: BTreeMap<u64, usize>,
}

impl FoldAssignment {
    /// Record positions in `dataset` for each fold, in dataset order.
    pub fn fold_positions(&self, dataset: &Dataset) -> Vec<Vec<usize>> {
        let mut folds = vec![Vec::new(); self.k];
        for (pos, r) in dataset.records.iter().enumerate() {
            if let Some(&f) = self.fold_of.get(&r.example_id) {
                folds[f].push(pos);
            }
        }
        folds
    }

    /// `(train, test)` record positions for fold `fold`.
    pub fn split(&self, dataset: &Dataset, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (pos, r) in dataset.records.iter().enumerate() {
            if self.fold_of.get(&r.example_id) == Some(&fold) {
                test.push(pos);
            } else {
                train.push(pos);
            }
        }
        (train, test)
    }
}

/// Per-class shuffled positions, one shuffle per class drawn in label order
/// from a single seeded stream.
fn shuffled_by_class(labels: &[usize], class_count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); class_count];
    for (pos, &label) in labels.iter().enumerate() {
        by_class[label].push(pos);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }
    by_class
}

/// Assigns every record to one of `k` folds so that each class is spread as
/// evenly as possible (per-class fold counts differ by at most one).
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let counts = dataset.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count > 0 && count < k {
            return Err(Error::InvalidArgument(format!(
                "class {} has {count} < {k} examples",
                dataset.manifest.label_name(class)
            )));
        }
    }
    let labels = dataset.labels();
    let by_class = shuffled_by_class(&labels, dataset.class_count(), seed);
    let mut fold_of = BTreeMap::new();
    // Continue the round robin across classes so total fold sizes stay balanced too.
    let mut next = 0;
    for members in by_class {
        for pos in members {
            fold_of.insert(dataset.records[pos].example_id, next);
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

/// Sequential divisor apportionment of `total` seats over class sizes.
///
/// Every present class starts with one seat; each further seat goes to the
/// class with the highest `size / (seats + 1/2)` that still has room, ties to
/// the lower class index. Seats for `total + 1` extend seats for `total`, so
/// class targets never shrink as the rate grows.
fn apportion(sizes: &[usize], total: usize) -> Vec<usize> {
    let mut seats: Vec<usize> = sizes.iter().map(|&s| usize::from(s > 0)).collect();
    let mut given: usize = seats.iter().sum();
    while given < total {
        let mut best: Option<usize> = None;
        for (c, &size) in sizes.iter().enumerate() {
            if seats[c] >= size {
                continue;
            }
            best = match best {
                None => Some(c),
                // size_c / (s_c + 1/2) > size_b / (s_b + 1/2), in exact integers.
                Some(b) => {
                    let lhs = size as u128 * (2 * seats[b] as u128 + 1);
                    let rhs = sizes[b] as u128 * (2 * seats[c] as u128 + 1);
                    if lhs > rhs {
                        Some(c)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        match best {
            Some(c) => {
                seats[c] += 1;
                given += 1;
            }
            None => break,
        }
    }
    seats
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sampling rate must be in (0, 1], got {rate}")))
    }
}

/// Stratified subsample of the positions `0..labels.len()`, returned sorted.
///
/// The overall target is `rate × N` rounded half up, split across classes by
/// [`apportion`] with at least one example per present class. Each class
/// contributes a prefix of one fixed seeded shuffle, so for a fixed seed the
/// selection for a smaller rate is a subset of the selection for a larger one.
pub fn subsample_positions(labels: &[usize], class_count: usize, rate: f64, seed: u64) -> Result<Vec<usize>> {
    check_rate(rate)?;
    if labels.iter().any(|&l| l >= class_count) {
        return Err(Error::InvalidArgument("label out of range".into()));
    }
    let by_class = shuffled_by_class(labels, class_count, seed);
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let total = ((rate * labels.len() as f64) + 0.5).floor() as usize;
    let seats = apportion(&sizes, total.min(labels.len()));
    let mut out: Vec<usize> = by_class
        .iter()
        .zip(&seats)
        .flat_map(|(members, &n)| members[..n].iter().copied())
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Stratified subsample of `dataset`; record order is preserved.
pub fn subsample(dataset: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    check_rate(rate)?;
    if rate == 1.0 {
        return Ok(dataset.clone());
    }
    let positions = subsample_positions(&dataset.labels(), dataset.class_count(), rate, seed)?;
    Ok(dataset.select(&positions))
}

/// Carves a stratified held-out split; returns `(train, test)` positions.
pub fn stratified_split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let test = subsample_positions(&dataset.labels(), dataset.class_count(), test_fraction, seed)?;
    let mut is_test = vec![false; dataset.len()];
    for &p in &test {
        is_test[p] = true;
    }
    let train = (0..dataset.len()).filter(|&p| !is_test[p]).collect();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::test_support::*;
    use crate::store::ExampleRecord;
    use proptest::prelude::*;

    fn balanced(per_class: &[usize]) -> Dataset {
        let mut records: Vec<ExampleRecord> = Vec::new();
        let mut id = 0;
        for (label, &n) in per_class.iter().enumerate() {
            for _ in 0..n {
                records.push(record(id * 3 + 1, label as u32, vec![vec![(0, 1.0)]]));
                id += 1;
            }
        }
        let names: Vec<String> = (0..per_class.len()).map(|c| format!("c{c}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        Dataset::new(manifest(4, &names), records).unwrap()
    }

    #[test]
    fn five_five_over_five_folds() {
        let ds = balanced(&[5, 5]);
        let folds = stratified_folds(&ds, 5, 7).unwrap();
        for fold in folds.fold_positions(&ds) {
            let mut labels: Vec<usize> = fold.iter().map(|&p| ds.records[p].label()).collect();
            labels.sort();
            assert_eq!(labels, vec![0, 1]);
        }
    }

    #[test]
    fn folds_deterministic() {
        let ds = balanced(&[13, 9, 7]);
        assert_eq!(stratified_folds(&ds, 5, 3).unwrap(), stratified_folds(&ds, 5, 3).unwrap());
        assert_ne!(stratified_folds(&ds, 5, 3).unwrap(), stratified_folds(&ds, 5, 4).unwrap());
    }

    #[test]
    fn small_class_rejected() {
        let mut ds = balanced(&[4, 6]);
        ds.manifest.label_names = vec!["A".into(), "B".into()];
        let err = stratified_folds(&ds, 5, 0).unwrap_err();
        assert!(err.to_string().contains("class A has 4 < 5 examples"), "{err}");
    }

    #[test]
    fn subsample_identity_at_one() {
        let ds = balanced(&[5, 5]);
        assert_eq!(subsample(&ds, 1.0, 11).unwrap(), ds);
    }

    #[test]
    fn subsample_half_of_five_five() {
        // total = round_half_up(0.5 * 10) = 5; seats start 1/1, then
        // 5/1.5 tie -> class 0, 5/1.5 > 5/2.5 -> class 1, 5/2.5 tie -> class 0.
        for seed in 0..20 {
            let sub = subsample(&balanced(&[5, 5]), 0.5, seed).unwrap();
            assert_eq!(sub.len(), 5);
            assert_eq!(sub.class_counts(), vec![3, 2]);
        }
    }

    #[test]
    fn minimum_one_per_class() {
        let sub = subsample(&balanced(&[1, 1]), 0.1, 0).unwrap();
        assert_eq!(sub.len(), 2);
    }

    #[test]
    fn bad_rates_rejected() {
        let ds = balanced(&[2, 2]);
        for rate in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(subsample(&ds, rate, 0).is_err());
        }
    }

    #[test]
    fn split_is_a_partition() {
        let ds = balanced(&[20, 30]);
        let (train, test) = stratified_split(&ds, 0.2, 5).unwrap();
        assert_eq!(test.len(), 10);
        assert_eq!(train.len() + test.len(), 50);
        assert!(train.iter().all(|p| !test.contains(p)));
    }

    proptest! {
        #[test]
        fn folds_partition_and_balance(sizes in prop::collection::vec(3usize..30, 2..5), k in 2usize..4, seed: u64) {
            let ds = balanced(&sizes);
            let folds = stratified_folds(&ds, k, seed).unwrap();
            prop_assert_eq!(folds.fold_of.len(), ds.len());
            let positions = folds.fold_positions(&ds);
            let total: usize = positions.iter().map(Vec::len).sum();
            prop_assert_eq!(total, ds.len());
            for class in 0..sizes.len() {
                let per_fold: Vec<usize> = positions
                    .iter()
                    .map(|f| f.iter().filter(|&&p| ds.records[p].label() == class).count())
                    .collect();
                let lo = *per_fold.iter().min().unwrap();
                let hi = *per_fold.iter().max().unwrap();
                prop_assert!(hi - lo <= 1);
            }
        }

        #[test]
        fn subsample_is_monotone_in_rate(sizes in prop::collection::vec(1usize..40, 1..5), a in 0.01f64..1.0, b in 0.01f64..1.0, seed: u64) {
            let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = subsample_positions(&labels, sizes.len(), lo, seed).unwrap();
            let large = subsample_positions(&labels, sizes.len(), hi, seed).unwrap();
            prop_assert!(small.iter().all(|p| large.binary_search(p).is_ok()));
            let full = subsample_positions(&labels, sizes.len(), 1.0, seed).unwrap();
            prop_assert_eq!(full.len(), labels.len());
        }
    }
}
