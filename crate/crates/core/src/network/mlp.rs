//! Dense layers with a hand-derived backward pass.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::spec::{HiddenActivation, MlpConfig};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// `sin(w0 * z)`
    Sine(f64),
    Relu,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    /// `out x in`
    pub weight: Array2<F>,
    pub bias: Array1<F>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F> {
    pub layers: Vec<Dense<F>>,
}

/// Intermediates kept by [`Mlp::forward_cached`].
#[derive(Debug, Clone)]
pub struct MlpTape<F> {
    /// Input to each layer.
    inputs: Vec<Array2<F>>,
    /// Pre-activation of each layer.
    pre: Vec<Array2<F>>,
}

/// Gradients of one layer.
#[derive(Debug, Clone)]
pub struct DenseGrad<F> {
    pub weight: Array2<F>,
    pub bias: Array1<F>,
}

fn activate<F: Scalar>(act: Activation, z: F) -> F {
    match act {
        Activation::Sine(w0) => (F::of(w0) * z).sin(),
        Activation::Relu => z.max(F::zero()),
        Activation::Linear => z,
    }
}

/// Derivative of the activation with respect to its pre-activation.
pub fn activation_derivative<F: Scalar>(act: Activation, z: F) -> F {
    match act {
        Activation::Sine(w0) => {
            let w0 = F::of(w0);
            w0 * (w0 * z).cos()
        }
        Activation::Relu => {
            if z > F::zero() {
                F::one()
            } else {
                F::zero()
            }
        }
        Activation::Linear => F::one(),
    }
}

impl<F: Scalar> Mlp<F> {
    fn activations(config: &MlpConfig) -> Vec<Activation> {
        let mut acts = Vec::with_capacity(config.depth + 1);
        for l in 0..config.depth {
            acts.push(match config.activation {
                HiddenActivation::Sine => Activation::Sine(if l == 0 { config.w0_first } else { config.w0_hidden }),
                HiddenActivation::Relu => Activation::Relu,
            });
        }
        acts.push(Activation::Linear);
        acts
    }

    fn layer_dims(config: &MlpConfig) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(config.depth + 1);
        let mut n_in = config.input_dim;
        for _ in 0..config.depth {
            dims.push((config.hidden_width, n_in));
            n_in = config.hidden_width;
        }
        dims.push((config.output_dim, n_in));
        dims
    }

    /// Weights `U(-b, b)` with `b = weight_bound(layer, n_in)`; biases use
    /// `bias_bound(n_in)`, zero when that bound is zero.
    fn build(config: &MlpConfig, rng: &mut Rng, weight_bound: impl Fn(usize, usize) -> f64, bias_bound: impl Fn(usize) -> f64) -> Self {
        let layers = Self::layer_dims(config)
            .into_iter()
            .zip(Self::activations(config))
            .enumerate()
            .map(|(l, ((n_out, n_in), activation))| {
                let wb = weight_bound(l, n_in);
                let weight = Array2::from_shape_simple_fn((n_out, n_in), || F::of(rng.uniform_in(-wb, wb)));
                let bb = bias_bound(n_in);
                let bias = Array1::from_shape_simple_fn(n_out, || {
                    if bb > 0.0 {
                        F::of(rng.uniform_in(-bb, bb))
                    } else {
                        F::zero()
                    }
                });
                Dense {
                    weight,
                    bias,
                    activation,
                }
            })
            .collect();
        Self { layers }
    }

    /// Sine-network initialization: first layer `U(-1/n_in, 1/n_in)`, later
    /// layers `U(-sqrt(6/n_in)/w0_hidden, +sqrt(6/n_in)/w0_hidden)`, zero biases.
    pub fn siren_init(config: &MlpConfig, rng: &mut Rng) -> Self {
        let w0_hidden = config.w0_hidden;
        Self::build(
            config,
            rng,
            |l, n_in| {
                if l == 0 {
                    1.0 / n_in as f64
                } else {
                    (6.0 / n_in as f64).sqrt() / w0_hidden
                }
            },
            |_| 0.0,
        )
    }

    /// Fan-in uniform `U(-1/sqrt(n_in), 1/sqrt(n_in))` for weights and biases.
    pub fn fan_in_init(config: &MlpConfig, rng: &mut Rng) -> Self {
        let bound = |n_in: usize| 1.0 / (n_in as f64).sqrt();
        Self::build(config, rng, |_, n_in| bound(n_in), bound)
    }

    pub fn init(config: &MlpConfig, rng: &mut Rng) -> Self {
        match config.activation {
            HiddenActivation::Sine => Self::siren_init(config, rng),
            HiddenActivation::Relu => Self::fan_in_init(config, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    fn check_input(&self, x: &ArrayView2<F>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Config(format!(
                "feature dimension {} does not match network input {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Batch forward pass (`B x in` -> `B x out`).
    pub fn forward(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        self.check_input(&x)?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weight.t());
            z += &layer.bias;
            z.mapv_inplace(|v| activate(layer.activation, v));
            a = z;
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: ArrayView2<F>) -> Result<(Array2<F>, MlpTape<F>)> {
        self.check_input(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weight.t());
            z += &layer.bias;
            let next = z.mapv(|v| activate(layer.activation, v));
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        Ok((a, MlpTape { inputs, pre }))
    }

    /// Reverse pass. Returns per-layer gradients and the gradient with
    /// respect to the network input.
    pub fn backward(&self, tape: &MlpTape<F>, upstream: ArrayView2<F>) -> (Vec<DenseGrad<F>>, Array2<F>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.to_owned();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let z = &tape.pre[l];
            let act = layer.activation;
            if act != Activation::Linear {
                ndarray::Zip::from(&mut delta)
                    .and(z)
                    .for_each(|d, &zv| *d *= activation_derivative(act, zv));
            }
            let weight = delta.t().dot(&tape.inputs[l]);
            let bias = delta.sum_axis(Axis(0));
            let next = delta.dot(&layer.weight);
            grads.push(DenseGrad { weight, bias });
            delta = next;
        }
        grads.reverse();
        (grads, delta)
    }

    pub fn tensors(&self) -> Vec<&[F]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for l in &mut self.layers {
            out.push(l.weight.as_slice_mut().expect("standard layout"));
            out.push(l.bias.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn tensor_shapes(&self) -> Vec<(String, Vec<usize>)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| {
                [
                    (format!("mlp.{i}.weight"), l.weight.shape().to_vec()),
                    (format!("mlp.{i}.bias"), l.bias.shape().to_vec()),
                ]
            })
            .collect()
    }
}

/// Flattens layer gradients into [`Mlp::tensors`] order.
pub fn flatten_grads<F: Scalar>(grads: Vec<DenseGrad<F>>) -> Vec<Vec<F>> {
    grads
        .into_iter()
        .flat_map(|g| [g.weight.iter().copied().collect(), g.bias.to_vec()])
        .collect()
}
