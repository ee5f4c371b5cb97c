use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    /// Row c: per-attribute means of class c.
    pub means: Array2<f64>,
    pub variances: Array2<f64>,
    pub log_priors: [f64; 2],
}

/// Gaussian naive Bayes. Every class variance gets `var_smoothing` times the
/// largest attribute variance added.
pub fn fit_naive_bayes(x: ArrayView2<f64>, y: &[u8], var_smoothing: f64) -> Result<NaiveBayes> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    let d = x.ncols();
    let epsilon = var_smoothing * x.var_axis(Axis(0), 0.0).iter().copied().fold(0.0, f64::max);
    let mut means = Array2::zeros((2, d));
    let mut variances = Array2::zeros((2, d));
    let mut log_priors = [0.0; 2];
    for c in 0..2u8 {
        let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if rows.is_empty() {
            return Err(Error::Domain(format!("naive Bayes: class {c} absent")));
        }
        let sub = x.select(Axis(0), &rows);
        means
            .row_mut(c as usize)
            .assign(&sub.mean_axis(Axis(0)).expect("non-empty"));
        variances
            .row_mut(c as usize)
            .assign(&(sub.var_axis(Axis(0), 0.0) + epsilon));
        log_priors[c as usize] = (rows.len() as f64 / y.len() as f64).ln();
    }
    if variances.iter().any(|&v| v <= 0.0) {
        return Err(Error::Numeric(
            "naive Bayes: zero variance (all attributes constant)".into(),
        ));
    }
    Ok(NaiveBayes {
        means,
        variances,
        log_priors,
    })
}

impl NaiveBayes {
    /// Joint log-likelihood `log P(c) + sum_j log N(x_j | mu_cj, var_cj)`.
    fn joint(&self, row: ArrayView1<f64>, c: usize) -> f64 {
        let mu = self.means.row(c);
        let var = self.variances.row(c);
        let mut ll = self.log_priors[c];
        for j in 0..row.len() {
            let diff = row[j] - mu[j];
            ll -= 0.5 * ((2.0 * std::f64::consts::PI * var[j]).ln() + diff * diff / var[j]);
        }
        ll
    }

    /// `[P(y = 0 | x), P(y = 1 | x)]` via log-sum-exp.
    pub fn posterior(&self, row: ArrayView1<f64>) -> [f64; 2] {
        let j0 = self.joint(row, 0);
        let j1 = self.joint(row, 1);
        let m = j0.max(j1);
        let lse = m + ((j0 - m).exp() + (j1 - m).exp()).ln();
        [(j0 - lse).exp(), (j1 - lse).exp()]
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.rows().into_iter().map(|r| self.posterior(r)[1]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn symmetric_classes_give_half_at_midpoint() {
        let x = array![[-2.0], [-1.0], [-3.0], [2.0], [1.0], [3.0]];
        let nb = fit_naive_bayes(x.view(), &[0, 0, 0, 1, 1, 1], 1e-9).unwrap();
        assert!((nb.posterior(array![0.0].view())[1] - 0.5).abs() < 1e-9);
        assert!(nb.posterior(array![2.5].view())[1] > 0.99);
    }

    #[test]
    fn single_class_rejected() {
        assert!(fit_naive_bayes(array![[1.0], [2.0]].view(), &[1, 1], 1e-9).is_err());
    }

    proptest! {
        #[test]
        fn posteriors_sum_to_one(q in proptest::collection::vec(-5.0f64..5.0, 2)) {
            let x = array![[0.1, 0.3], [0.4, 0.2], [0.9, 0.7], [0.6, 1.0], [0.2, 0.5]];
            let nb = fit_naive_bayes(x.view(), &[0, 0, 1, 1, 0], 1e-9).unwrap();
            let p = nb.posterior(ndarray::ArrayView1::from(&q));
            prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
        }
    }
}
