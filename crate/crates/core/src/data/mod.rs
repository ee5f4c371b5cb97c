//! Dataset ingestion and preparation: WDBC loading, simulated structured
//! missingness, min-max scaling, sparsity split, and stratified folds.

mod io;
mod missing;
mod scale;
mod split;
mod wdbc;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use io::{read_masked_csv, read_truth_csv, write_masked_csv, write_truth_csv};
pub use missing::{simulate_missing, MissingnessSpec};
pub use scale::{apply_minmax, fit_minmax, ScalingParams};
pub use split::{split_by_sparsity, stratified_kfold, FoldPlan, SparsitySplit};
pub use wdbc::{load_wdbc, parse_wdbc, LoadOptions, WdbcData};

/// Attribute count of the WDBC table.
pub const N_ATTRS: usize = 30;

/// Numeric table with a same-shape observation mask (`true` = observed) and
/// binary labels (0 benign, 1 malignant).
///
/// Values at unobserved cells are carriers only (set to 0.0 by every
/// constructor in this module).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    values: Array2<f64>,
    mask: Array2<bool>,
    labels: Vec<u8>,
}

impl MaskedMatrix {
    pub fn new(values: Array2<f64>, mask: Array2<bool>, labels: Vec<u8>) -> Result<Self> {
        if values.raw_dim() != mask.raw_dim() {
            return Err(Error::Shape(format!(
                "values {:?} vs mask {:?}",
                values.shape(),
                mask.shape()
            )));
        }
        if labels.len() != values.nrows() {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                values.nrows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Domain(format!("label {bad} is not 0 or 1")));
        }
        Ok(MaskedMatrix {
            values,
            mask,
            labels,
        })
    }

    /// A fully observed matrix.
    pub fn complete(values: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        let mask = Array2::from_elem(values.raw_dim(), true);
        Self::new(values, mask, labels)
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn mask(&self) -> ArrayView2<'_, bool> {
        self.mask.view()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[[row, col]]
    }

    pub fn missing_count(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }

    pub fn row_missing_count(&self, row: usize) -> usize {
        self.mask.row(row).iter().filter(|&&m| !m).count()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - pos, pos]
    }

    pub fn select_rows(&self, rows: &[usize]) -> MaskedMatrix {
        MaskedMatrix {
            values: self.values.select(Axis(0), rows),
            mask: self.mask.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// Values with every unobserved cell forced to 0.0.
    pub(crate) fn zero_filled(&self) -> Array2<f64> {
        let mut out = self.values.clone();
        ndarray::Zip::from(&mut out)
            .and(&self.mask)
            .for_each(|v, &m| {
                if !m {
                    *v = 0.0;
                }
            });
        out
    }

    pub(crate) fn into_parts(self) -> (Array2<f64>, Array2<bool>, Vec<u8>) {
        (self.values, self.mask, self.labels)
    }
}

/// Ground truth for one simulated-missing cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthCell {
    pub row: usize,
    pub attr: usize,
    pub value: f64,
}

/// True values of every cell masked by [`simulate_missing`], in the units of
/// the matrix they were taken from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruthSidecar {
    pub cells: Vec<TruthCell>,
}

impl TruthSidecar {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Maps every true value through `params` (no clipping).
    pub fn scaled(&self, params: &ScalingParams) -> TruthSidecar {
        TruthSidecar {
            cells: self
                .cells
                .iter()
                .map(|c| TruthCell {
                    value: params.scale_value(c.attr, c.value),
                    ..*c
                })
                .collect(),
        }
    }

    /// `data` with the sidecar's cells restored as observed values.
    pub fn restore(&self, data: &MaskedMatrix) -> MaskedMatrix {
        let mut out = data.clone();
        for c in &self.cells {
            out.values[[c.row, c.attr]] = c.value;
            out.mask[[c.row, c.attr]] = true;
        }
        out
    }

    /// Rows touched by the sidecar, ascending.
    pub fn rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.cells.iter().map(|c| c.row).collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }
}
