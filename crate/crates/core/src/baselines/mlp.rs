use ndarray::{Array1, ArrayView2, Axis};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::nn::{adam_step, bce_logits, sigmoid, Activation, AdamConfig, AdamState, NetParams};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// L2 penalty on weights (not biases), added to the mean batch loss.
    pub l2: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 50,
            epochs: 200,
            batch_size: 200,
            learning_rate: 1e-3,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// One hidden ReLU layer and a single logit output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub net: NetParams,
}

impl Mlp {
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(self.net.predict(x)?.column(0).mapv(sigmoid))
    }
}

pub fn mlp_net(inputs: usize, hidden: usize, rng: &mut seed::Rng) -> Result<NetParams> {
    NetParams::glorot(
        &[inputs, hidden, 1],
        &[Activation::Relu, Activation::Identity],
        rng,
    )
}

pub fn fit_mlp(x: ArrayView2<f64>, y: &[u8], config: &MlpConfig) -> Result<Mlp> {
    if x.nrows() != y.len() || y.is_empty() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if config.hidden == 0 || config.batch_size == 0 {
        return Err(Error::Config(
            "mlp hidden width and batch size must be positive".into(),
        ));
    }
    let mut rng = seed::rng_for(config.seed, &[0x31f]);
    let mut net = mlp_net(x.ncols(), config.hidden, &mut rng)?;
    let mut opt = AdamState::new(
        &net,
        AdamConfig {
            alpha: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    let n = y.len();
    let targets: Array1<f64> = y.iter().map(|&l| f64::from(l)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), chunk);
            let tb = targets.select(Axis(0), chunk);
            let (out, tape) = net.forward(xb.view())?;
            let (loss, g) = bce_logits(out.column(0), tb.view())?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "mlp loss not finite at epoch {epoch}"
                )));
            }
            let grad = g.insert_axis(Axis(1));
            let (mut grads, _) = net.backward(&tape, grad.view())?;
            if config.l2 > 0.0 {
                let scale = config.l2 / chunk.len() as f64;
                for (lg, layer) in grads.layers.iter_mut().zip(net.layers()) {
                    lg.weights.scaled_add(scale, &layer.weights);
                }
            }
            adam_step(&mut net, &grads, &mut opt)?;
        }
    }
    Ok(Mlp { net })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{grad_check, LossKind};
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn learns_separable_toy() {
        let mut rng = seed::rng(2);
        let x = Array2::from_shape_fn((120, 30), |(i, j)| {
            if j < 2 {
                (if i % 2 == 1 { 0.75 } else { 0.25 }) + rng.random_range(-0.15..0.15)
            } else {
                0.0
            }
        });
        let y: Vec<u8> = (0..120).map(|i| (i % 2) as u8).collect();
        let m = fit_mlp(
            x.view(),
            &y,
            &MlpConfig {
                batch_size: 32,
                ..MlpConfig::default()
            },
        )
        .unwrap();
        let p = m.predict_proba(x.view()).unwrap();
        let acc = (0..120).filter(|&i| u8::from(p[i] >= 0.5) == y[i]).count() as f64 / 120.0;
        assert!(acc >= 0.95, "{acc}");
    }

    #[test]
    fn architecture_passes_grad_check() {
        for s in 0..3 {
            let mut rng = seed::rng(s);
            let net = mlp_net(30, 50, &mut rng).unwrap();
            assert_eq!(net.widths(), vec![30, 50, 1]);
            let x = Array2::from_shape_fn((5, 30), |_| rng.random_range(0.0..1.0));
            let t = Array2::from_shape_fn((5, 1), |(i, _)| (i % 2) as f64);
            let err = grad_check(&net, x.view(), LossKind::BceLogitHeads(t.view())).unwrap();
            assert!(err <= 1e-4, "{err}");
        }
    }
}
