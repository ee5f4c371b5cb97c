//! Dense layers, forward pass with a recorded tape, and hand-derived backprop.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Sigmoid),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    /// ReLU uses subgradient 0 at exactly 0.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// One affine map followed by an element-wise activation.
///
/// `weights` has shape `(fan_out, fan_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn fan_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.nrows()
    }

    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        Dense {
            weights: Array2::zeros((fan_out, fan_in)),
            bias: Array1::zeros(fan_out),
            activation,
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite glorot bound");
        let weights = Array2::from_shape_fn((fan_out, fan_in), |_| dist.sample(rng));
        Dense {
            weights,
            bias: Array1::zeros(fan_out),
            activation,
        }
    }
}

/// An ordered stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    layers: Vec<Dense>,
}

/// Intermediates recorded by [`NetParams::forward`], consumed by
/// [`NetParams::backward`].
#[derive(Debug, Clone)]
pub struct BatchTape {
    input: Array2<f64>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
}

impl BatchTape {
    pub fn layer_count(&self) -> usize {
        self.pre.len()
    }

    pub fn batch_size(&self) -> usize {
        self.input.nrows()
    }

    pub fn input(&self) -> &Array2<f64> {
        &self.input
    }

    pub fn pre_activations(&self) -> &[Array2<f64>] {
        &self.pre
    }

    pub fn post_activations(&self) -> &[Array2<f64>] {
        &self.post
    }
}

/// Per-layer gradients (or any tensor list) shaped like a [`NetParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &NetParams) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.len()),
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights *= factor;
            l.bias *= factor;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()))
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn shape_matches(&self, net: &NetParams) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.raw_dim() == l.weights.raw_dim() && g.bias.len() == l.bias.len()
            })
    }
}

impl NetParams {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.fan_out() {
                return Err(Error::Shape(format!(
                    "layer {k}: bias length {} != fan_out {}",
                    l.bias.len(),
                    l.fan_out()
                )));
            }
            if k > 0 && layers[k - 1].fan_out() != l.fan_in() {
                return Err(Error::Shape(format!(
                    "layer {k}: fan_in {} != previous fan_out {}",
                    l.fan_in(),
                    layers[k - 1].fan_out()
                )));
            }
        }
        let net = NetParams { layers };
        if !net.is_finite() {
            return Err(Error::Numeric("non-finite parameter".into()));
        }
        Ok(net)
    }

    /// Glorot-initialized network. `widths` lists every layer width including
    /// the input; `activations` has one entry per weight layer.
    pub fn glorot<R: Rng + ?Sized>(
        widths: &[usize],
        activations: &[Activation],
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() != activations.len() + 1 {
            return Err(Error::Shape(format!(
                "{} widths need {} activations, got {}",
                widths.len(),
                widths.len().saturating_sub(1),
                activations.len()
            )));
        }
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &act)| Dense::glorot(w[0], w[1], act, rng))
            .collect();
        NetParams::new(layers)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    /// Layer widths including the input width.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_width())
            .chain(self.layers.iter().map(Dense::fan_out))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite())
        })
    }

    fn check_input(&self, batch: &ArrayView2<f64>) -> Result<()> {
        if batch.nrows() == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        if batch.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "layer 0: batch has {} columns, expected fan_in {}",
                batch.ncols(),
                self.input_width()
            )));
        }
        Ok(())
    }

    fn affine(layer: &Dense, input: &ArrayView2<f64>) -> Array2<f64> {
        let mut z = input.dot(&layer.weights.t());
        z += &layer.bias;
        z
    }

    /// Forward pass that records every pre- and post-activation.
    pub fn forward(&self, batch: ArrayView2<f64>) -> Result<(Array2<f64>, BatchTape)> {
        self.check_input(&batch)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let z = match post.last() {
                Some(a) => Self::affine(layer, &a.view()),
                None => Self::affine(layer, &batch),
            };
            let act = layer.activation;
            let a = z.mapv(|v| act.apply(v));
            pre.push(z);
            post.push(a);
        }
        let output = post.last().cloned().expect("non-empty network");
        Ok((
            output,
            BatchTape {
                input: batch.to_owned(),
                pre,
                post,
            },
        ))
    }

    /// Forward pass without recording intermediates.
    pub fn predict(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&batch)?;
        let mut a: Option<Array2<f64>> = None;
        for layer in &self.layers {
            let mut z = match &a {
                Some(prev) => Self::affine(layer, &prev.view()),
                None => Self::affine(layer, &batch),
            };
            let act = layer.activation;
            z.mapv_inplace(|v| act.apply(v));
            a = Some(z);
        }
        Ok(a.expect("non-empty network"))
    }

    /// Backpropagates `output_grad` (dLoss/dOutput) through the recorded tape.
    ///
    /// Returns parameter gradients and dLoss/dInput.
    pub fn backward(
        &self,
        tape: &BatchTape,
        output_grad: ArrayView2<f64>,
    ) -> Result<(Gradients, Array2<f64>)> {
        if tape.layer_count() != self.layers.len() {
            return Err(Error::State(format!(
                "tape has {} layers, network has {}",
                tape.layer_count(),
                self.layers.len()
            )));
        }
        for (k, (layer, z)) in self.layers.iter().zip(&tape.pre).enumerate() {
            if z.ncols() != layer.fan_out() || z.nrows() != tape.batch_size() {
                return Err(Error::State(format!(
                    "tape layer {k} does not match network layer shape"
                )));
            }
        }
        let out_shape = tape.post.last().expect("non-empty tape").raw_dim();
        if output_grad.raw_dim() != out_shape {
            return Err(Error::Shape(format!(
                "output gradient shape {:?} != output shape {:?}",
                output_grad.shape(),
                out_shape
            )));
        }

        let mut grads: Vec<LayerGrad> = Vec::with_capacity(self.layers.len());
        let mut upstream = output_grad.to_owned();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let act = layer.activation;
            let mut delta = upstream;
            Zip::from(&mut delta)
                .and(&tape.pre[k])
                .and(&tape.post[k])
                .for_each(|d, &z, &a| *d *= act.derivative(z, a));
            let input = if k == 0 {
                &tape.input
            } else {
                &tape.post[k - 1]
            };
            let weights = delta.t().dot(input);
            let bias = delta.sum_axis(Axis(0));
            upstream = delta.dot(&layer.weights);
            grads.push(LayerGrad { weights, bias });
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, upstream))
    }

    /// Every scalar parameter as `(layer, is_bias, flat index)`.
    pub(crate) fn param_coords(&self) -> Vec<(usize, bool, usize)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(k, l)| {
                (0..l.weights.len())
                    .map(move |i| (k, false, i))
                    .chain((0..l.bias.len()).map(move |i| (k, true, i)))
            })
            .collect()
    }

    pub(crate) fn param_mut(&mut self, layer: usize, is_bias: bool, index: usize) -> &mut f64 {
        let l = &mut self.layers[layer];
        if is_bias {
            &mut l.bias[index]
        } else {
            let cols = l.weights.ncols();
            &mut l.weights[[index / cols, index % cols]]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use ndarray::array;

    fn single(weights: Array2<f64>, act: Activation) -> NetParams {
        let n = weights.nrows();
        NetParams::new(vec![Dense {
            weights,
            bias: Array1::zeros(n),
            activation: act,
        }])
        .unwrap()
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net = single(Array2::eye(2), Activation::Identity);
        let (out, tape) = net.forward(array![[1.0, 2.0]].view()).unwrap();
        assert_eq!(out, array![[1.0, 2.0]]);
        assert_eq!(tape.layer_count(), 1);
    }

    #[test]
    fn relu_layer_clips_negatives() {
        let net = single(Array2::eye(2), Activation::Relu);
        let (out, _) = net.forward(array![[-1.0, 3.0]].view()).unwrap();
        assert_eq!(out, array![[0.0, 3.0]]);
    }

    #[test]
    fn autoencoder_shape_is_finite() {
        let mut rng = seed::rng(3);
        let net = NetParams::glorot(
            &[30, 20, 10, 20, 30],
            &[
                Activation::Relu,
                Activation::Relu,
                Activation::Relu,
                Activation::Sigmoid,
            ],
            &mut rng,
        )
        .unwrap();
        let batch = Array2::from_shape_fn((4, 30), |(i, j)| ((i * 30 + j) as f64 * 0.37).sin());
        let (out, tape) = net.forward(batch.view()).unwrap();
        assert_eq!(out.dim(), (4, 30));
        assert!(out.iter().all(|v| v.is_finite()));
        assert_eq!(tape.layer_count(), 4);
        assert_eq!(net.predict(batch.view()).unwrap(), out);
    }

    #[test]
    fn mismatched_batch_names_layer() {
        let net = single(Array2::eye(2), Activation::Identity);
        let err = net.forward(array![[1.0, 2.0, 3.0]].view()).unwrap_err();
        assert!(err.to_string().contains("layer 0"), "{err}");
        assert!(net.forward(Array2::<f64>::zeros((0, 2)).view()).is_err());
    }

    #[test]
    fn incompatible_layers_rejected() {
        let err = NetParams::new(vec![
            Dense::zeros(3, 4, Activation::Relu),
            Dense::zeros(5, 2, Activation::Sigmoid),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("layer 1"));
    }

    #[test]
    fn zero_output_grad_gives_zero_gradients() {
        let mut rng = seed::rng(11);
        let net = NetParams::glorot(
            &[3, 4, 2],
            &[Activation::Relu, Activation::Sigmoid],
            &mut rng,
        )
        .unwrap();
        let x = array![[0.1, 0.2, 0.3], [0.5, -0.4, 0.9]];
        let (_, tape) = net.forward(x.view()).unwrap();
        let (g, dx) = net.backward(&tape, Array2::zeros((2, 2)).view()).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tape_from_other_net_is_rejected() {
        let mut rng = seed::rng(1);
        let a = NetParams::glorot(
            &[2, 3, 1],
            &[Activation::Relu, Activation::Sigmoid],
            &mut rng,
        )
        .unwrap();
        let b = NetParams::glorot(&[2, 1], &[Activation::Sigmoid], &mut rng).unwrap();
        let (_, tape) = a.forward(array![[0.1, 0.2]].view()).unwrap();
        assert!(matches!(
            b.backward(&tape, array![[1.0]].view()),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let mut rng = seed::rng(5);
        let net = NetParams::glorot(
            &[30, 50, 2],
            &[Activation::Relu, Activation::Sigmoid],
            &mut rng,
        )
        .unwrap();
        let x = Array2::from_shape_fn((7, 30), |(i, j)| ((i + 3 * j) as f64).cos());
        let a = net.predict(x.view()).unwrap();
        let b = net.predict(x.view()).unwrap();
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
