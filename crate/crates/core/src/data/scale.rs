use ndarray::{Array1, Array2};

use super::MaskedMatrix;
use crate::error::{Error, Result};

/// Per-attribute minimum and maximum over observed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub min: Array1<f64>,
    pub max: Array1<f64>,
}

impl ScalingParams {
    /// `(x - min) / (max - min)`, or 0.0 for a constant attribute. Not clipped.
    pub fn scale_value(&self, attr: usize, x: f64) -> f64 {
        let range = self.max[attr] - self.min[attr];
        if range > 0.0 {
            (x - self.min[attr]) / range
        } else {
            0.0
        }
    }

    pub fn unscale_value(&self, attr: usize, s: f64) -> f64 {
        self.min[attr] + s * (self.max[attr] - self.min[attr])
    }

    /// Inverse transform of a complete scaled matrix.
    pub fn unscale(&self, scaled: &Array2<f64>) -> Array2<f64> {
        Array2::from_shape_fn(scaled.raw_dim(), |(i, j)| {
            self.unscale_value(j, scaled[[i, j]])
        })
    }
}

pub fn fit_minmax(data: &MaskedMatrix) -> Result<ScalingParams> {
    let cols = data.cols();
    let mut min = Array1::from_elem(cols, f64::INFINITY);
    let mut max = Array1::from_elem(cols, f64::NEG_INFINITY);
    let values = data.values();
    let mask = data.mask();
    for i in 0..data.rows() {
        for j in 0..cols {
            if mask[[i, j]] {
                let v = values[[i, j]];
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
    }
    if let Some(j) = (0..cols).find(|&j| !min[j].is_finite()) {
        return Err(Error::DegenerateAttribute(j));
    }
    Ok(ScalingParams { min, max })
}

/// Scales observed cells into `[0, 1]`, clipping values outside the fitted
/// range. Unobserved cells are left as 0.0 carriers.
pub fn apply_minmax(data: &MaskedMatrix, params: &ScalingParams) -> Result<MaskedMatrix> {
    if params.min.len() != data.cols() {
        return Err(Error::Shape(format!(
            "scaling fitted on {} attributes, data has {}",
            params.min.len(),
            data.cols()
        )));
    }
    let mask = data.mask();
    let values = data.values();
    let scaled = Array2::from_shape_fn(values.raw_dim(), |(i, j)| {
        if mask[[i, j]] {
            params.scale_value(j, values[[i, j]]).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    MaskedMatrix::new(scaled, mask.to_owned(), data.labels().to_vec())
}
