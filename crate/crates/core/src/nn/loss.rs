//! Reconstruction and binary cross-entropy losses with their output gradients.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};

use super::net::sigmoid;
use crate::error::{Error, Result};

/// Clamp applied to every probability before taking a logarithm.
pub const PROB_EPS: f64 = 1e-7;

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Squared reconstruction error: mean over rows of the squared row norm of
/// `pred - target`. The gradient is `2 (pred - target) / B`.
pub fn mse_loss(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.raw_dim() != target.raw_dim() {
        return Err(Error::Shape(format!(
            "mse: pred {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let rows = pred.nrows().max(1) as f64;
    let diff = &pred - &target;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / rows;
    let grad = diff * (2.0 / rows);
    Ok((loss, grad))
}

/// Like [`mse_loss`] but only cells where `observed` is true contribute.
pub fn masked_mse_loss(
    pred: ArrayView2<f64>,
    target: ArrayView2<f64>,
    observed: ArrayView2<bool>,
) -> Result<(f64, Array2<f64>)> {
    if pred.raw_dim() != target.raw_dim() || pred.raw_dim() != observed.raw_dim() {
        return Err(Error::Shape("masked mse: shape mismatch".into()));
    }
    let rows = pred.nrows().max(1) as f64;
    let mut grad = Array2::zeros(pred.raw_dim());
    let mut loss = 0.0;
    Zip::from(&mut grad)
        .and(&pred)
        .and(&target)
        .and(&observed)
        .for_each(|g, &p, &t, &m| {
            if m {
                let d = p - t;
                loss += d * d;
                *g = 2.0 * d / rows;
            }
        });
    Ok((loss / rows, grad))
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "{what}: probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Binary cross-entropy `-mean[t ln p + (1 - t) ln(1 - p)]` with `p` clamped
/// to `[PROB_EPS, 1 - PROB_EPS]`. Returns the loss and dLoss/dp.
pub fn bce_loss(pred: ArrayView1<f64>, target: ArrayView1<f64>) -> Result<(f64, Array1<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "bce: {} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Shape("bce: empty input".into()));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Array1::zeros(pred.len());
    for ((g, &p), &t) in grad.iter_mut().zip(pred).zip(target) {
        check_prob(p, "bce")?;
        let pc = clamp_prob(p);
        loss -= t * pc.ln() + (1.0 - t) * (1.0 - pc).ln();
        *g = (pc - t) / (pc * (1.0 - pc)) / n;
    }
    Ok((loss / n, grad))
}

/// Sum over output columns of the per-column [`bce_loss`]; used for networks
/// with several independent sigmoid heads.
pub fn bce_heads(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.raw_dim() != target.raw_dim() {
        return Err(Error::Shape("bce heads: shape mismatch".into()));
    }
    let mut grad = Array2::zeros(pred.raw_dim());
    let mut total = 0.0;
    for j in 0..pred.ncols() {
        let (l, g) = bce_loss(pred.column(j), target.column(j))?;
        total += l;
        grad.column_mut(j).assign(&g);
    }
    Ok((total, grad))
}

/// Binary cross-entropy on logits, in margin form: with `s = (2t - 1) z`,
/// the loss is `-ln clamp(sigmoid(s))` and dLoss/dz is `-(2t - 1) sigmoid(-s) / n`.
///
/// Flipping both the logit sign and the target leaves `s` unchanged, so the
/// loss is identical and the gradient is exactly negated.
pub fn bce_logits(logits: ArrayView1<f64>, target: ArrayView1<f64>) -> Result<(f64, Array1<f64>)> {
    if logits.len() != target.len() {
        return Err(Error::Shape(format!(
            "bce: {} logits vs {} targets",
            logits.len(),
            target.len()
        )));
    }
    if logits.is_empty() {
        return Err(Error::Shape("bce: empty input".into()));
    }
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Array1::zeros(logits.len());
    for ((g, &z), &t) in grad.iter_mut().zip(logits).zip(target) {
        let sign = if t == 1.0 {
            1.0
        } else if t == 0.0 {
            -1.0
        } else {
            return Err(Error::Domain(format!("bce target {t} is not 0 or 1")));
        };
        let s = sign * z;
        loss -= clamp_prob(sigmoid(s)).ln();
        *g = -sign * sigmoid(-s) / n;
    }
    Ok((loss / n, grad))
}

/// Sum over columns of [`bce_logits`].
pub fn bce_logit_heads(
    logits: ArrayView2<f64>,
    target: ArrayView2<f64>,
) -> Result<(f64, Array2<f64>)> {
    if logits.raw_dim() != target.raw_dim() {
        return Err(Error::Shape("bce heads: shape mismatch".into()));
    }
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut total = 0.0;
    for j in 0..logits.ncols() {
        let (l, g) = bce_logits(logits.column(j), target.column(j))?;
        total += l;
        grad.column_mut(j).assign(&g);
    }
    Ok((total, grad))
}
