use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::mlp::{flatten_grads, Mlp, MlpTape};
use super::spec::ModelSpec;
use crate::encodings::Encoder;
use crate::error::Result;
use crate::rng::{mix, Rng};
use crate::scalar::Scalar;

/// Encoder + network: the coordinate field `f(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inr<F> {
    pub spec: ModelSpec,
    pub encoder: Encoder<F>,
    pub mlp: Mlp<F>,
}

/// Forward intermediates needed by [`Inr::backward`].
pub struct InrTape<F> {
    features: Array2<F>,
    mlp: MlpTape<F>,
}

impl<F: Scalar> Inr<F> {
    pub fn new(spec: &ModelSpec, seed: u64) -> Self {
        let encoder = Encoder::new(&spec.encoding, mix(seed, "encoder_init"));
        let mlp = Mlp::init(&spec.mlp, &mut Rng::keyed(seed, "mlp_init"));
        Self {
            spec: spec.clone(),
            encoder,
            mlp,
        }
    }

    /// Predictions for a batch of `(x, y)` rows.
    pub fn predict(&self, xy: ArrayView2<F>) -> Result<Array1<F>> {
        let features = self.encoder.encode(xy);
        let out = self.mlp.forward(features.view())?;
        Ok(out.index_axis_move(Axis(1), 0))
    }

    pub fn forward(&self, xy: ArrayView2<F>) -> Result<(Array1<F>, InrTape<F>)> {
        let features = self.encoder.encode(xy);
        let (out, mlp) = self.mlp.forward_cached(features.view())?;
        Ok((out.index_axis_move(Axis(1), 0), InrTape { features, mlp }))
    }

    /// Gradients of `sum_b upstream[b] * f(xy[b])` for every tensor in
    /// [`Inr::tensors`] order.
    pub fn backward(&self, xy: ArrayView2<F>, tape: &InrTape<F>, upstream: ArrayView1<F>) -> Vec<Vec<F>> {
        let up = upstream.insert_axis(Axis(1));
        let (layer_grads, feature_grads) = self.mlp.backward(&tape.mlp, up);
        let mut grads = self.encoder.backward(xy, tape.features.view(), feature_grads.view());
        grads.extend(flatten_grads(layer_grads));
        grads
    }

    pub fn tensors(&self) -> Vec<&[F]> {
        let mut t = self.encoder.tensors();
        t.extend(self.mlp.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.mlp.tensors_mut());
        t
    }

    pub fn tensor_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut s = self.encoder.tensor_shapes();
        s.extend(self.mlp.tensor_shapes());
        s
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Cell-center coordinates `((c+0.5)/W, (r+0.5)/H)` for the given pixels.
pub fn pixel_coords<F: Scalar>(pixels: &[(usize, usize)], height: usize, width: usize) -> Array2<F> {
    let (h, w) = (height as f64, width as f64);
    let mut xy = Array2::zeros((pixels.len(), 2));
    for (mut row, &(r, c)) in xy.outer_iter_mut().zip(pixels) {
        row[0] = F::of((c as f64 + 0.5) / w);
        row[1] = F::of((r as f64 + 0.5) / h);
    }
    xy
}
