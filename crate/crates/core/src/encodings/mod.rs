//! Coordinate encodings: map `(x, y)` in the unit square to the feature vector
//! fed to the network, and route feature gradients back to any learnable
//! encoding parameters.

mod fourier;
mod grid;
mod haar;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub use fourier::{encode_fourier, FourierBank};
pub use grid::{encode_grid, grid_resolutions, GridLevel, GridTables};
pub use haar::{encode_haar, haar_sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    /// Raw coordinates (SIREN input).
    Identity,
    Fourier,
    Haar,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    pub bands: usize,
    /// Highest initial frequency, cycles per unit.
    pub max_freq: f64,
    pub learnable: bool,
    pub levels: usize,
    pub feats_per_level: usize,
    pub include_input: bool,
    pub base_resolution: usize,
    pub max_resolution: usize,
    /// Half-width of the uniform grid-table initialization.
    pub grid_init_scale: f64,
}

impl EncodingSpec {
    pub fn identity() -> Self {
        Self {
            kind: EncodingKind::Identity,
            ..Self::base()
        }
    }

    pub fn fourier() -> Self {
        Self {
            kind: EncodingKind::Fourier,
            ..Self::base()
        }
    }

    pub fn haar() -> Self {
        Self {
            kind: EncodingKind::Haar,
            ..Self::base()
        }
    }

    pub fn grid() -> Self {
        Self {
            kind: EncodingKind::Grid,
            ..Self::base()
        }
    }

    fn base() -> Self {
        Self {
            kind: EncodingKind::Identity,
            bands: 48,
            max_freq: 24.0,
            learnable: true,
            levels: 8,
            feats_per_level: 2,
            include_input: true,
            base_resolution: 16,
            max_resolution: 512,
            grid_init_scale: 1e-4,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self.kind {
            EncodingKind::Identity => 2,
            EncodingKind::Fourier => 2 * self.bands,
            EncodingKind::Haar => 2 * self.levels + if self.include_input { 2 } else { 0 },
            EncodingKind::Grid => self.levels * self.feats_per_level,
        }
    }
}

/// An instantiated encoder with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Encoder<F> {
    Identity,
    Fourier(FourierBank<F>),
    Haar { levels: usize, include_input: bool },
    Grid(GridTables<F>),
}

impl<F: Scalar> Encoder<F> {
    pub fn new(spec: &EncodingSpec, seed: u64) -> Self {
        match spec.kind {
            EncodingKind::Identity => Encoder::Identity,
            EncodingKind::Fourier => {
                Encoder::Fourier(FourierBank::log_spaced(spec.bands, spec.max_freq, spec.learnable))
            }
            EncodingKind::Haar => Encoder::Haar {
                levels: spec.levels,
                include_input: spec.include_input,
            },
            EncodingKind::Grid => Encoder::Grid(GridTables::new(
                spec.levels,
                spec.feats_per_level,
                spec.base_resolution,
                spec.max_resolution,
                spec.grid_init_scale,
                seed,
            )),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Encoder::Identity => 2,
            Encoder::Fourier(bank) => 2 * bank.bands(),
            Encoder::Haar {
                levels,
                include_input,
            } => 2 * levels + if *include_input { 2 } else { 0 },
            Encoder::Grid(t) => t.output_dim(),
        }
    }

    /// Encodes a batch of coordinates (`B x 2`, columns x then y).
    pub fn encode(&self, xy: ArrayView2<F>) -> Array2<F> {
        let d = self.output_dim();
        let mut out = Array2::zeros((xy.nrows(), d));
        for (row, mut dst) in xy.outer_iter().zip(out.outer_iter_mut()) {
            let p = [row[0], row[1]];
            let dst = dst.as_slice_mut().expect("standard layout");
            match self {
                Encoder::Identity => dst.copy_from_slice(&p),
                Encoder::Fourier(bank) => bank.encode_into(p, dst),
                Encoder::Haar {
                    levels,
                    include_input,
                } => haar::encode_into(p, *levels, *include_input, dst),
                Encoder::Grid(t) => t.encode_into(p, dst),
            }
        }
        out
    }

    /// Gradients of the learnable parameters, one vector per tensor in
    /// [`Encoder::tensors`] order.
    pub fn backward(&self, xy: ArrayView2<F>, features: ArrayView2<F>, grad: ArrayView2<F>) -> Vec<Vec<F>> {
        match self {
            Encoder::Fourier(bank) if bank.learnable => vec![bank.backward(xy, features, grad)],
            Encoder::Grid(t) => t.backward(xy, grad),
            _ => Vec::new(),
        }
    }

    pub fn tensors(&self) -> Vec<&[F]> {
        match self {
            Encoder::Fourier(bank) if bank.learnable => {
                vec![bank.freqs.as_slice().expect("standard layout")]
            }
            Encoder::Grid(t) => t.levels.iter().map(|l| l.table.as_slice().expect("standard layout")).collect(),
            _ => Vec::new(),
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [F]> {
        match self {
            Encoder::Fourier(bank) if bank.learnable => {
                vec![bank.freqs.as_slice_mut().expect("standard layout")]
            }
            Encoder::Grid(t) => t
                .levels
                .iter_mut()
                .map(|l| l.table.as_slice_mut().expect("standard layout"))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// `(name, shape)` for each learnable tensor.
    pub fn tensor_shapes(&self) -> Vec<(String, Vec<usize>)> {
        match self {
            Encoder::Fourier(bank) if bank.learnable => {
                vec![("fourier.freqs".into(), bank.freqs.shape().to_vec())]
            }
            Encoder::Grid(t) => t
                .levels
                .iter()
                .enumerate()
                .map(|(i, l)| (format!("grid.level{i}"), l.table.shape().to_vec()))
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Identity encoding used by SIREN.
pub fn siren_input<F: Copy>(xy: [F; 2]) -> [F; 2] {
    xy
}
