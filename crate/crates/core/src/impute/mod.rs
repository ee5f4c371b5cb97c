//! Missing-value imputation: zeros, observed attribute means, and a stacked
//! autoencoder trained on low-sparsity records.

mod autoencoder;

use ndarray::{Array1, Array2, ArrayView2};

use crate::data::{MaskedMatrix, TruthSidecar};
use crate::error::{Error, Result};

pub use autoencoder::{
    impute_autoencoder, train_autoencoder, AeLoss, AutoencoderConfig, AutoencoderModel, Corruption,
    EpochLoss, AE_WIDTHS,
};

/// Missing cells become 0.0; observed cells are copied bit for bit.
pub fn impute_zero(data: &MaskedMatrix) -> Array2<f64> {
    data.zero_filled()
}

/// Per-attribute means over observed training cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputerStats {
    pub means: Array1<f64>,
}

pub fn fit_mean_imputer(train: &MaskedMatrix) -> Result<ImputerStats> {
    let values = train.values();
    let mask = train.mask();
    let mut means = Array1::zeros(train.cols());
    for j in 0..train.cols() {
        let (sum, n) = (0..train.rows())
            .filter(|&i| mask[[i, j]])
            .fold((0.0, 0usize), |(s, n), i| (s + values[[i, j]], n + 1));
        if n == 0 {
            return Err(Error::DegenerateAttribute(j));
        }
        means[j] = sum / n as f64;
    }
    Ok(ImputerStats { means })
}

pub fn impute_mean(stats: &ImputerStats, data: &MaskedMatrix) -> Result<Array2<f64>> {
    if stats.means.len() != data.cols() {
        return Err(Error::Shape(format!(
            "mean imputer fitted on {} attributes, data has {}",
            stats.means.len(),
            data.cols()
        )));
    }
    let mut out = data.values().to_owned();
    let mask = data.mask();
    for ((i, j), v) in out.indexed_iter_mut() {
        if !mask[[i, j]] {
            *v = stats.means[j];
        }
    }
    Ok(out)
}

/// Root-mean-square error over exactly the sidecar's cells. `truth` must be
/// in the same units as `completed`.
pub fn imputation_rmse(completed: ArrayView2<f64>, truth: &TruthSidecar) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Domain("empty ground-truth sidecar".into()));
    }
    let mut sse = 0.0;
    for c in &truth.cells {
        let v = completed.get([c.row, c.attr]).ok_or_else(|| {
            Error::Shape(format!("sidecar cell ({}, {}) out of range", c.row, c.attr))
        })?;
        sse += (v - c.value).powi(2);
    }
    Ok((sse / truth.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TruthCell;
    use ndarray::array;

    fn partial() -> MaskedMatrix {
        MaskedMatrix::new(
            array![[0.3, 0.0], [1.0, 0.5], [3.0, 0.25]],
            array![[true, false], [true, true], [false, true]],
            vec![0, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn zero_imputation() {
        let d = partial();
        let out = impute_zero(&d);
        assert_eq!(out.row(0).to_vec(), vec![0.3, 0.0]);
        let changed = out.iter().zip(d.mask().iter()).filter(|(_, &m)| !m).count();
        assert_eq!(changed, d.missing_count());
        let full = MaskedMatrix::complete(array![[0.1, 0.2]], vec![1]).unwrap();
        assert_eq!(impute_zero(&full), array![[0.1, 0.2]]);
    }

    #[test]
    fn mean_imputation_fills_observed_mean() {
        let d = MaskedMatrix::new(
            array![[1.0], [3.0], [0.0]],
            array![[true], [true], [false]],
            vec![0, 0, 1],
        )
        .unwrap();
        let stats = fit_mean_imputer(&d).unwrap();
        let out = impute_mean(&stats, &d).unwrap();
        assert_eq!(out.column(0).to_vec(), vec![1.0, 3.0, 2.0]);
        // column mean preserved
        assert_eq!(out.column(0).mean().unwrap(), stats.means[0]);
    }

    #[test]
    fn mean_imputer_identity_and_idempotent() {
        let d = partial();
        let stats = fit_mean_imputer(&d).unwrap();
        let once = impute_mean(&stats, &d).unwrap();
        let again = impute_mean(
            &stats,
            &MaskedMatrix::complete(once.clone(), vec![0, 1, 0]).unwrap(),
        )
        .unwrap();
        assert_eq!(once, again);
        for ((i, j), v) in once.indexed_iter() {
            if d.is_observed(i, j) {
                assert_eq!(v.to_bits(), d.values()[[i, j]].to_bits());
            }
        }
    }

    #[test]
    fn mean_imputer_rejects_empty_attribute() {
        let d = MaskedMatrix::new(array![[1.0, 0.0]], array![[true, false]], vec![0]).unwrap();
        assert!(matches!(
            fit_mean_imputer(&d),
            Err(Error::DegenerateAttribute(1))
        ));
    }

    #[test]
    fn rmse_cases() {
        let truth = TruthSidecar {
            cells: vec![
                TruthCell {
                    row: 0,
                    attr: 1,
                    value: 0.2,
                },
                TruthCell {
                    row: 2,
                    attr: 0,
                    value: 0.7,
                },
            ],
        };
        let mut m = Array2::zeros((3, 2));
        m[[0, 1]] = 0.2;
        m[[2, 0]] = 0.7;
        assert_eq!(imputation_rmse(m.view(), &truth).unwrap(), 0.0);
        m[[0, 1]] += 0.1;
        m[[2, 0]] += 0.1;
        assert!((imputation_rmse(m.view(), &truth).unwrap() - 0.1).abs() < 1e-12);
        assert!(imputation_rmse(m.view(), &TruthSidecar::default()).is_err());
    }
}
