use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            weight_decay: 1e-6,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamWState<F> {
    pub m: Vec<Vec<F>>,
    pub v: Vec<Vec<F>>,
    /// Number of completed steps.
    pub t: u64,
}

impl<F: Scalar> AdamWState<F> {
    pub fn new(sizes: impl IntoIterator<Item = usize>) -> Self {
        let (m, v) = sizes
            .into_iter()
            .map(|n| (vec![F::zero(); n], vec![F::zero(); n]))
            .unzip();
        Self { m, v, t: 0 }
    }
}

/// One AdamW update over all tensors. Decoupled decay `w -= lr*wd*w` is
/// applied first, then the bias-corrected Adam step.
pub fn adamw_step<F: Scalar>(params: Vec<&mut [F]>, grads: &[Vec<F>], state: &mut AdamWState<F>, cfg: &AdamWConfig) {
    assert_eq!(params.len(), grads.len(), "parameter/gradient tensor count");
    assert_eq!(params.len(), state.m.len(), "parameter/state tensor count");
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (F::of(cfg.beta1), F::of(cfg.beta2));
    let one = F::one();
    let bc1 = one - F::of(cfg.beta1.powi(t));
    let bc2 = one - F::of(cfg.beta2.powi(t));
    let lr = F::of(cfg.lr);
    let decay = one - F::of(cfg.lr * cfg.weight_decay);
    let eps = F::of(cfg.eps);

    for (((w, g), m), v) in params.into_iter().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        assert_eq!(w.len(), g.len());
        for i in 0..w.len() {
            let gi = g[i];
            m[i] = b1 * m[i] + (one - b1) * gi;
            v[i] = b2 * v[i] + (one - b2) * gi * gi;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            w[i] = w[i] * decay - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_scalar(w: f64, g: f64, wd: f64) -> f64 {
        let mut p = vec![w];
        let mut st = AdamWState::<f64>::new([1]);
        let cfg = AdamWConfig {
            weight_decay: wd,
            ..Default::default()
        };
        adamw_step(vec![p.as_mut_slice()], &[vec![g]], &mut st, &cfg);
        p[0]
    }

    #[test]
    fn zero_gradient_no_decay_is_noop() {
        assert_eq!(step_scalar(1.0, 0.0, 0.0), 1.0);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let w = step_scalar(0.0, 1.0, 0.0);
        assert!((w + 1e-3 / (1.0 + 1e-8)).abs() < 1e-15);
        assert!((w + 9.99999e-4).abs() < 1e-9);
    }

    #[test]
    fn decay_alone() {
        let w = step_scalar(1.0, 0.0, 1e-6);
        assert!((w - (1.0 - 1e-9)).abs() < 1e-15);
    }

    #[test]
    fn bias_correction_over_steps() {
        // Constant gradient: each bias-corrected step has magnitude ~lr.
        let mut p = vec![0.0f64];
        let mut st = AdamWState::<f64>::new([1]);
        let cfg = AdamWConfig {
            weight_decay: 0.0,
            ..Default::default()
        };
        for _ in 0..5 {
            adamw_step(vec![p.as_mut_slice()], &[vec![2.0]], &mut st, &cfg);
        }
        assert!((p[0] + 5e-3).abs() < 1e-9);
        assert_eq!(st.t, 5);
    }
}
