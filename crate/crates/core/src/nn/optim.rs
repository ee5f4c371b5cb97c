//! SGD and Adam parameter updates.

use ndarray::Zip;

use super::net::{Gradients, NetParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub step_count: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(net: &NetParams, config: AdamConfig) -> Self {
        AdamState {
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
            step_count: 0,
            config,
        }
    }
}

fn check_grads(net: &NetParams, grads: &Gradients) -> Result<()> {
    if !grads.shape_matches(net) {
        return Err(Error::Shape("gradients do not match network shape".into()));
    }
    for (k, g) in grads.layers.iter().enumerate() {
        if let Some((i, _)) = g.weights.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let cols = g.weights.ncols();
            return Err(Error::Numeric(format!(
                "non-finite gradient at layer {k} weights[{}, {}]",
                i / cols,
                i % cols
            )));
        }
        if let Some((i, _)) = g.bias.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient at layer {k} bias[{i}]"
            )));
        }
    }
    Ok(())
}

/// One Adam step with bias correction.
pub fn adam_step(net: &mut NetParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    check_grads(net, grads)?;
    if !state.first_moment.shape_matches(net) || !state.second_moment.shape_matches(net) {
        return Err(Error::State(
            "optimizer state does not match network".into(),
        ));
    }
    state.step_count += 1;
    let AdamConfig {
        alpha,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step_count as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);

    let update = |p: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= alpha * m_hat / (v_hat.sqrt() + epsilon);
    };

    for (((layer, g), m), v) in net
        .layers_mut()
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.first_moment.layers)
        .zip(&mut state.second_moment.layers)
    {
        Zip::from(&mut layer.weights)
            .and(&g.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .for_each(update);
        Zip::from(&mut layer.bias)
            .and(&g.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(update);
    }
    Ok(())
}

/// Plain stochastic gradient descent with optional momentum.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Option<Gradients>,
}

impl Sgd {
    pub fn new(learning_rate: f64, momentum: f64) -> Self {
        Sgd {
            learning_rate,
            momentum,
            velocity: None,
        }
    }

    pub fn step(&mut self, net: &mut NetParams, grads: &Gradients) -> Result<()> {
        check_grads(net, grads)?;
        let lr = self.learning_rate;
        if self.momentum == 0.0 {
            for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
                layer.weights.scaled_add(-lr, &g.weights);
                layer.bias.scaled_add(-lr, &g.bias);
            }
            return Ok(());
        }
        let mu = self.momentum;
        let velocity = self
            .velocity
            .get_or_insert_with(|| Gradients::zeros_like(net));
        for ((layer, g), vel) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut velocity.layers)
        {
            vel.weights *= mu;
            vel.weights.scaled_add(-lr, &g.weights);
            vel.bias *= mu;
            vel.bias.scaled_add(-lr, &g.bias);
            layer.weights += &vel.weights;
            layer.bias += &vel.bias;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::net::{Activation, Dense};
    use ndarray::{array, Array1};

    fn scalar_net(w: f64) -> NetParams {
        NetParams::new(vec![Dense {
            weights: array![[w]],
            bias: Array1::zeros(1),
            activation: Activation::Identity,
        }])
        .unwrap()
    }

    fn scalar_grads(net: &NetParams, g: f64) -> Gradients {
        let mut grads = Gradients::zeros_like(net);
        grads.layers[0].weights[[0, 0]] = g;
        grads
    }

    #[test]
    fn zero_gradients_are_a_no_op() {
        let mut net = scalar_net(0.7);
        let before = net.clone();
        let mut state = AdamState::new(&net, AdamConfig::default());
        let zero = Gradients::zeros_like(&net);
        for _ in 0..25 {
            adam_step(&mut net, &zero, &mut state).unwrap();
        }
        assert_eq!(net, before);
        assert_eq!(state.step_count, 25);
    }

    #[test]
    fn first_step_moves_by_alpha() {
        let mut net = scalar_net(0.0);
        let mut state = AdamState::new(&net, AdamConfig::default());
        let g = scalar_grads(&net, 1.0);
        adam_step(&mut net, &g, &mut state).unwrap();
        let w = net.layers()[0].weights[[0, 0]];
        assert!((w + 1e-3).abs() < 1e-10, "{w}");
    }

    #[test]
    fn non_finite_gradient_is_named() {
        let mut net = scalar_net(0.0);
        let mut state = AdamState::new(&net, AdamConfig::default());
        let g = scalar_grads(&net, f64::NAN);
        let err = adam_step(&mut net, &g, &mut state).unwrap_err();
        assert!(err.to_string().contains("layer 0 weights[0, 0]"), "{err}");
    }

    #[test]
    fn sgd_moves_against_gradient() {
        let mut net = scalar_net(1.0);
        let mut sgd = Sgd::new(0.1, 0.0);
        let g = scalar_grads(&net, 2.0);
        sgd.step(&mut net, &g).unwrap();
        assert!((net.layers()[0].weights[[0, 0]] - 0.8).abs() < 1e-15);

        let mut net = scalar_net(1.0);
        let mut sgd = Sgd::new(0.1, 0.5);
        let g = scalar_grads(&net, 1.0);
        sgd.step(&mut net, &g).unwrap();
        sgd.step(&mut net, &g).unwrap();
        // v1 = -0.1, v2 = -0.05 - 0.1
        assert!((net.layers()[0].weights[[0, 0]] - 0.75).abs() < 1e-15);
    }
}
