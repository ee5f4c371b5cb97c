//! Central finite-difference check of the analytic gradients.

use ndarray::{Array2, ArrayView2};

use super::loss::{bce_heads, bce_logit_heads, mse_loss};
use super::net::NetParams;
use crate::error::Result;

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor for the relative error. Central differences at `FD_STEP`
/// carry roughly `1e-16 |loss| / FD_STEP` of rounding error, so gradients
/// below this are compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub enum LossKind<'a> {
    /// Squared reconstruction error against the given target.
    Mse(ArrayView2<'a, f64>),
    /// Sum of per-column binary cross-entropies against 0/1 targets.
    BceHeads(ArrayView2<'a, f64>),
    /// As `BceHeads`, with the network emitting logits for sigmoid heads.
    BceLogitHeads(ArrayView2<'a, f64>),
}

impl LossKind<'_> {
    pub fn evaluate(&self, output: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
        match self {
            LossKind::Mse(t) => mse_loss(output, *t),
            LossKind::BceHeads(t) => bce_heads(output, *t),
            LossKind::BceLogitHeads(t) => bce_logit_heads(output, *t),
        }
    }
}

fn loss_at(net: &NetParams, batch: ArrayView2<f64>, loss: &LossKind) -> Result<f64> {
    let out = net.predict(batch)?;
    Ok(loss.evaluate(out.view())?.0)
}

/// Largest relative disagreement between backprop and central differences,
/// `|a - n| / max(|a|, |n|, REL_FLOOR)`, over every parameter. `net` is not
/// modified.
pub fn grad_check(net: &NetParams, batch: ArrayView2<f64>, loss: LossKind) -> Result<f64> {
    let (out, tape) = net.forward(batch)?;
    let (_, out_grad) = loss.evaluate(out.view())?;
    let (analytic, _) = net.backward(&tape, out_grad.view())?;

    let analytic_flat: Vec<f64> = analytic
        .layers
        .iter()
        .flat_map(|l| {
            l.weights
                .iter()
                .chain(l.bias.iter())
                .copied()
                .collect::<Vec<_>>()
        })
        .collect();

    let mut probe = net.clone();
    let mut numeric = Vec::with_capacity(analytic_flat.len());
    for (k, is_bias, i) in net.param_coords() {
        let original = *probe.param_mut(k, is_bias, i);
        *probe.param_mut(k, is_bias, i) = original + FD_STEP;
        let up = loss_at(&probe, batch, &loss)?;
        *probe.param_mut(k, is_bias, i) = original - FD_STEP;
        let down = loss_at(&probe, batch, &loss)?;
        *probe.param_mut(k, is_bias, i) = original;
        numeric.push((up - down) / (2.0 * FD_STEP));
    }

    Ok(analytic_flat
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::net::Activation;
    use crate::seed;
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn linear_mse_is_exact() {
        let mut rng = seed::rng(2);
        let net = NetParams::glorot(&[4, 3], &[Activation::Identity], &mut rng).unwrap();
        let x = Array2::from_shape_fn((5, 4), |_| rng.random_range(-1.0..1.0));
        let t = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let err = grad_check(&net, x.view(), LossKind::Mse(t.view())).unwrap();
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn one_layer_linear_closed_form() {
        // d/dW ||W x - t||^2 / B = 2 (pred - t) x^T / B
        let net = NetParams::new(vec![crate::nn::Dense {
            weights: ndarray::array![[0.5, -1.0]],
            bias: ndarray::array![0.0],
            activation: Activation::Identity,
        }])
        .unwrap();
        let x = ndarray::array![[2.0, 1.0]];
        let t = ndarray::array![[3.0]];
        let (out, tape) = net.forward(x.view()).unwrap();
        let (_, g) = mse_loss(out.view(), t.view()).unwrap();
        let (grads, _) = net.backward(&tape, g.view()).unwrap();
        // pred = 0, residual = -3
        assert_eq!(grads.layers[0].weights, ndarray::array![[-12.0, -6.0]]);
        assert_eq!(grads.layers[0].bias, ndarray::array![-6.0]);
    }

    #[test]
    fn two_layer_relu_net() {
        let mut rng = seed::rng(9);
        let net = NetParams::glorot(
            &[6, 8, 3],
            &[Activation::Relu, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        let x = Array2::from_shape_fn((10, 6), |_| rng.random_range(-1.0..1.0));
        let t = Array2::from_shape_fn((10, 3), |_| rng.random_range(-1.0..1.0));
        let err = grad_check(&net, x.view(), LossKind::Mse(t.view())).unwrap();
        assert!(err <= 1e-4, "{err}");
    }
}
