use ndarray::{Array2, ArrayView2};

use crate::scalar::Scalar;

/// Learnable frequency bank, `bands x 2` in cycles per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBank<F> {
    pub freqs: Array2<F>,
    pub learnable: bool,
}

impl<F: Scalar> FourierBank<F> {
    /// Magnitudes log-spaced over `[1, max_freq]`; directions cycle through
    /// x-axis, +45 deg, y-axis, -45 deg.
    pub fn log_spaced(bands: usize, max_freq: f64, learnable: bool) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = [(1.0, 0.0), (h, h), (0.0, 1.0), (h, -h)];
        let freqs = Array2::from_shape_fn((bands, 2), |(k, axis)| {
            let t = if bands > 1 { k as f64 / (bands - 1) as f64 } else { 0.0 };
            let mag = max_freq.powf(t);
            let (dx, dy) = dirs[k % 4];
            F::of(mag * if axis == 0 { dx } else { dy })
        });
        Self { freqs, learnable }
    }

    pub fn from_freqs(freqs: Array2<F>, learnable: bool) -> Self {
        assert_eq!(freqs.ncols(), 2);
        Self { freqs, learnable }
    }

    pub fn bands(&self) -> usize {
        self.freqs.nrows()
    }

    pub(super) fn encode_into(&self, xy: [F; 2], out: &mut [F]) {
        let n = self.bands();
        let tau = F::of(std::f64::consts::TAU);
        for k in 0..n {
            let phase = tau * (self.freqs[[k, 0]] * xy[0] + self.freqs[[k, 1]] * xy[1]);
            let (s, c) = phase.sin_cos();
            out[k] = s;
            out[n + k] = c;
        }
    }

    /// d(loss)/d(freqs) given the forward features (sin || cos) and their
    /// upstream gradients.
    pub(super) fn backward(&self, xy: ArrayView2<F>, features: ArrayView2<F>, grad: ArrayView2<F>) -> Vec<F> {
        let n = self.bands();
        let tau = F::of(std::f64::consts::TAU);
        let mut g = vec![F::zero(); 2 * n];
        for ((p, f), up) in xy.outer_iter().zip(features.outer_iter()).zip(grad.outer_iter()) {
            for k in 0..n {
                // d sin(a)/da = cos(a), d cos(a)/da = -sin(a), da/df = tau * xy.
                let da = up[k] * f[n + k] - up[n + k] * f[k];
                g[2 * k] += da * tau * p[0];
                g[2 * k + 1] += da * tau * p[1];
            }
        }
        g
    }
}

/// `[sin(2 pi f_k . xy)]_k || [cos(2 pi f_k . xy)]_k`.
pub fn encode_fourier<F: Scalar>(xy: [F; 2], bank: &FourierBank<F>) -> Vec<F> {
    let mut out = vec![F::zero(); 2 * bank.bands()];
    bank.encode_into(xy, &mut out);
    out
}
