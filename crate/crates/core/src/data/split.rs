use rand::seq::SliceRandom;

use super::MaskedMatrix;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsitySplit {
    /// Records whose missing fraction is below the threshold.
    pub low: MaskedMatrix,
    pub high: MaskedMatrix,
    pub low_rows: Vec<usize>,
    pub high_rows: Vec<usize>,
}

/// Partitions records by sparsity (missing cells / attributes): strictly
/// below `threshold` goes to `low`, everything else to `high`.
pub fn split_by_sparsity(data: &MaskedMatrix, threshold: f64) -> Result<SparsitySplit> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Domain(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let cols = data.cols().max(1) as f64;
    let (low_rows, high_rows): (Vec<usize>, Vec<usize>) =
        (0..data.rows()).partition(|&i| (data.row_missing_count(i) as f64 / cols) < threshold);
    Ok(SparsitySplit {
        low: data.select_rows(&low_rows),
        high: data.select_rows(&high_rows),
        low_rows,
        high_rows,
    })
}

/// Assignment of every record to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold plan: each class is shuffled and dealt round-robin to the
/// folds, the deal continuing across classes so fold sizes differ by at most 1.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Stratification(format!(
            "k = {k}; need at least 2 folds"
        )));
    }
    let mut rng = seed::rng_for(seed, &[0xf01d]);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::Stratification(format!(
                "class {class} has {} members, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan { k, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    #[test]
    fn sparsity_threshold_is_strict_for_low() {
        let mut mask = Array2::from_elem((3, 30), true);
        for j in 0..15 {
            mask[[0, j]] = false;
        }
        for j in 0..3 {
            mask[[2, j]] = false; // exactly 0.1
        }
        let d = MaskedMatrix::new(Array2::zeros((3, 30)), mask, vec![0, 1, 0]).unwrap();
        let s = split_by_sparsity(&d, 0.1).unwrap();
        assert_eq!(s.low_rows, vec![1]);
        assert_eq!(s.high_rows, vec![0, 2]);
        assert_eq!(s.low.rows(), 1);
        assert!(split_by_sparsity(&d, 1.5).is_err());
    }

    #[test]
    fn wdbc_sized_folds() {
        let labels: Vec<u8> = (0..569).map(|i| u8::from(i >= 357)).collect();
        let plan = stratified_kfold(&labels, 5, 42).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![113, 114, 114, 114, 114]);
        for f in 0..5 {
            let test = plan.test_rows(f);
            let pos = test.iter().filter(|&&i| labels[i] == 1).count();
            let neg = test.len() - pos;
            assert!((71..=72).contains(&neg), "{neg}");
            assert!((42..=43).contains(&pos), "{pos}");
        }
        assert_eq!(plan, stratified_kfold(&labels, 5, 42).unwrap());
        let other = stratified_kfold(&labels, 5, 43).unwrap();
        assert_ne!(plan, other);
        let mut other_sizes = other.fold_sizes();
        other_sizes.sort_unstable();
        assert_eq!(other_sizes, sizes);
    }

    #[test]
    fn small_class_is_rejected() {
        assert!(matches!(
            stratified_kfold(&[0, 0, 0, 0, 0, 1, 1], 5, 0),
            Err(Error::Stratification(_))
        ));
        assert!(stratified_kfold(&[0, 1], 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(
            labels in proptest::collection::vec(0u8..=1, 10..200),
            k in 2usize..8,
            seed in any::<u64>(),
        ) {
            let counts = [
                labels.iter().filter(|&&l| l == 0).count(),
                labels.iter().filter(|&&l| l == 1).count(),
            ];
            prop_assume!(counts.iter().all(|&c| c == 0 || c >= k));
            let plan = stratified_kfold(&labels, k, seed).unwrap();
            let mut seen = vec![false; labels.len()];
            for f in 0..k {
                for i in plan.test_rows(f) {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
                for class in 0..=1u8 {
                    let n = plan.test_rows(f).iter().filter(|&&i| labels[i] == class).count();
                    let ideal = counts[class as usize] as f64 / k as f64;
                    prop_assert!((n as f64 - ideal).abs() < 1.0);
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
