use ndarray::{Array3, ArrayView2};

use crate::rng::Rng;
use crate::scalar::Scalar;

/// Resolution schedule `min(base * 2^l, max)`.
pub fn grid_resolutions(levels: usize, base: usize, max: usize) -> Vec<usize> {
    (0..levels)
        .map(|l| base.saturating_mul(1usize << l.min(40)).min(max))
        .collect()
}

/// One dense level: `(res+1) x (res+1) x feats`, indexed `[row(y), col(x), f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLevel<F> {
    pub resolution: usize,
    pub table: Array3<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTables<F> {
    pub levels: Vec<GridLevel<F>>,
    pub feats: usize,
}

/// Cell index and fractional offset along one axis.
fn locate<F: Scalar>(u: F, res: usize) -> (usize, F) {
    let pos = u.max(F::zero()).min(F::one()) * F::of(res as f64);
    let i = pos.floor().to_usize().unwrap_or(0).min(res - 1);
    (i, pos - F::of(i as f64))
}

impl<F: Scalar> GridTables<F> {
    pub fn new(levels: usize, feats: usize, base: usize, max: usize, init_scale: f64, seed: u64) -> Self {
        let mut rng = Rng::keyed(seed, "grid_init");
        let levels = grid_resolutions(levels, base, max)
            .into_iter()
            .map(|res| GridLevel {
                resolution: res,
                table: Array3::from_shape_simple_fn((res + 1, res + 1, feats), || {
                    F::of(rng.uniform_in(-init_scale, init_scale))
                }),
            })
            .collect();
        Self { levels, feats }
    }

    pub fn output_dim(&self) -> usize {
        self.levels.len() * self.feats
    }

    pub(super) fn encode_into(&self, xy: [F; 2], out: &mut [F]) {
        let nf = self.feats;
        for (l, level) in self.levels.iter().enumerate() {
            let (i, tx) = locate(xy[0], level.resolution);
            let (j, ty) = locate(xy[1], level.resolution);
            let w = corner_weights(tx, ty);
            let t = &level.table;
            for f in 0..nf {
                out[l * nf + f] = w[0] * t[[j, i, f]]
                    + w[1] * t[[j, i + 1, f]]
                    + w[2] * t[[j + 1, i, f]]
                    + w[3] * t[[j + 1, i + 1, f]];
            }
        }
    }

    /// Scatters feature gradients onto the four surrounding nodes per level.
    pub(super) fn backward(&self, xy: ArrayView2<F>, grad: ArrayView2<F>) -> Vec<Vec<F>> {
        let nf = self.feats;
        let mut out: Vec<Vec<F>> = self
            .levels
            .iter()
            .map(|l| vec![F::zero(); l.table.len()])
            .collect();
        for (p, up) in xy.outer_iter().zip(grad.outer_iter()) {
            for (l, level) in self.levels.iter().enumerate() {
                let res = level.resolution;
                let (i, tx) = locate(p[0], res);
                let (j, ty) = locate(p[1], res);
                let w = corner_weights(tx, ty);
                let stride_row = (res + 1) * nf;
                let nodes = [
                    j * stride_row + i * nf,
                    j * stride_row + (i + 1) * nf,
                    (j + 1) * stride_row + i * nf,
                    (j + 1) * stride_row + (i + 1) * nf,
                ];
                let g = &mut out[l];
                for f in 0..nf {
                    let u = up[l * nf + f];
                    for (node, weight) in nodes.iter().zip(w) {
                        g[node + f] += weight * u;
                    }
                }
            }
        }
        out
    }
}

/// Bilinear weights for (i,j), (i+1,j), (i,j+1), (i+1,j+1).
fn corner_weights<F: Scalar>(tx: F, ty: F) -> [F; 4] {
    let one = F::one();
    [(one - tx) * (one - ty), tx * (one - ty), (one - tx) * ty, tx * ty]
}

/// Concatenated bilinear lookups over all levels.
pub fn encode_grid<F: Scalar>(xy: [F; 2], tables: &GridTables<F>) -> Vec<F> {
    let mut out = vec![F::zero(); tables.output_dim()];
    tables.encode_into(xy, &mut out);
    out
}
