use rand::seq::SliceRandom;

use super::{MaskedMatrix, TruthCell, TruthSidecar};
use crate::error::{Error, Result};
use crate::seed;

/// Structured missingness: the first `attr_count` attributes are removed from
/// `floor(numerator / denominator * class size)` records of each class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MissingnessSpec {
    pub attr_count: usize,
    pub numerator: usize,
    pub denominator: usize,
}

impl Default for MissingnessSpec {
    fn default() -> Self {
        MissingnessSpec {
            attr_count: 15,
            numerator: 1,
            denominator: 2,
        }
    }
}

/// Masks a leading block of attributes in a seeded random subset of each
/// class. Cells that were observed before masking are moved into the returned
/// sidecar; previously missing cells stay missing and are not recorded.
pub fn simulate_missing(
    data: &MaskedMatrix,
    spec: MissingnessSpec,
    seed: u64,
) -> Result<(MaskedMatrix, TruthSidecar)> {
    if spec.attr_count > data.cols() {
        return Err(Error::Domain(format!(
            "attr_count {} exceeds {} attributes",
            spec.attr_count,
            data.cols()
        )));
    }
    if spec.denominator == 0 || spec.numerator > spec.denominator {
        return Err(Error::Domain("sample fraction must lie in [0, 1]".into()));
    }
    let (mut values, mut mask, labels) = data.clone().into_parts();
    let mut rng = seed::rng_for(seed, &[0x6d15]);
    let mut chosen = Vec::new();
    for class in 0..=1u8 {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let take = members.len() * spec.numerator / spec.denominator;
        members.shuffle(&mut rng);
        chosen.extend_from_slice(&members[..take]);
    }
    chosen.sort_unstable();

    let mut truth = TruthSidecar::default();
    for &row in &chosen {
        for attr in 0..spec.attr_count {
            if mask[[row, attr]] {
                truth.cells.push(TruthCell {
                    row,
                    attr,
                    value: values[[row, attr]],
                });
                mask[[row, attr]] = false;
            }
            values[[row, attr]] = 0.0;
        }
    }
    Ok((MaskedMatrix::new(values, mask, labels)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn toy(n0: usize, n1: usize) -> MaskedMatrix {
        let n = n0 + n1;
        let values = Array2::from_shape_fn((n, 6), |(i, j)| 1.0 + (i * 6 + j) as f64);
        let labels = (0..n).map(|i| u8::from(i >= n0)).collect();
        MaskedMatrix::complete(values, labels).unwrap()
    }

    fn spec(attr_count: usize) -> MissingnessSpec {
        MissingnessSpec {
            attr_count,
            ..Default::default()
        }
    }

    #[test]
    fn floors_half_of_each_class() {
        let data = toy(7, 5);
        let (masked, truth) = simulate_missing(&data, spec(3), 1).unwrap();
        // floor(7/2) + floor(5/2) rows, 3 cells each
        assert_eq!(truth.len(), (3 + 2) * 3);
        assert_eq!(masked.missing_count(), 15);
        let rows = truth.rows();
        assert_eq!(rows.iter().filter(|&&r| r < 7).count(), 3);
        assert_eq!(rows.iter().filter(|&&r| r >= 7).count(), 2);
        for c in &truth.cells {
            assert_eq!(c.value, data.values()[[c.row, c.attr]]);
            assert!(c.attr < 3);
        }
        assert_eq!(truth.restore(&masked), data);
    }

    #[test]
    fn zero_attrs_is_identity() {
        let data = toy(4, 4);
        let (masked, truth) = simulate_missing(&data, spec(0), 9).unwrap();
        assert_eq!(masked, data);
        assert!(truth.is_empty());
    }

    #[test]
    fn seeded() {
        let data = toy(10, 10);
        let a = simulate_missing(&data, spec(2), 5).unwrap();
        let b = simulate_missing(&data, spec(2), 5).unwrap();
        let c = simulate_missing(&data, spec(2), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.1.rows(), c.1.rows());
    }

    #[test]
    fn never_unmasks_or_alters_observed() {
        let mut data = toy(6, 6);
        let (v, mut m, l) = data.clone().into_parts();
        m[[0, 1]] = false;
        m[[11, 5]] = false;
        data = MaskedMatrix::new(v, m, l).unwrap();
        let (masked, _) = simulate_missing(&data, spec(4), 3).unwrap();
        for i in 0..data.rows() {
            for j in 0..data.cols() {
                if !data.is_observed(i, j) {
                    assert!(!masked.is_observed(i, j));
                }
                if masked.is_observed(i, j) {
                    assert_eq!(masked.values()[[i, j]], data.values()[[i, j]]);
                }
            }
        }
    }

    #[test]
    fn too_many_attrs_rejected() {
        assert!(simulate_missing(&toy(2, 2), spec(7), 0).is_err());
    }
}
