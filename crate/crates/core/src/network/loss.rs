use crate::scalar::Scalar;

pub const DEFAULT_BETA: f64 = 0.01;

/// Smooth-l1 (Huber with a `1/beta` quadratic zone): returns the loss and its
/// derivative with respect to `pred`.
pub fn smooth_l1<F: Scalar>(pred: F, target: F, beta: F) -> (F, F) {
    let e = pred - target;
    let half = F::of(0.5);
    if e.abs() < beta {
        (half * e * e / beta, e / beta)
    } else {
        let sign = if e > F::zero() { F::one() } else { -F::one() };
        (e.abs() - half * beta, sign)
    }
}

/// Mean smooth-l1 over a batch; gradients are already divided by the batch size.
pub fn smooth_l1_mean<F: Scalar>(pred: &[F], target: &[F], beta: F) -> (f64, Vec<F>) {
    let n = F::of(pred.len() as f64);
    let mut total = 0.0;
    let grads = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let (l, g) = smooth_l1(p, t, beta);
            total += l.as_f64();
            g / n
        })
        .collect();
    (total / pred.len() as f64, grads)
}
