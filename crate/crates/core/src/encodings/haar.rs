use crate::scalar::Scalar;

/// Haar mother-wavelet sign: +1 on the first half of the unit cell, -1 on the second.
pub fn haar_sign<F: Scalar>(t: F) -> F {
    if t < F::of(0.5) {
        F::one()
    } else {
        -F::one()
    }
}

pub(super) fn encode_into<F: Scalar>(xy: [F; 2], levels: usize, include_input: bool, out: &mut [F]) {
    let mut i = 0;
    if include_input {
        out[0] = xy[0];
        out[1] = xy[1];
        i = 2;
    }
    let mut scale = F::one();
    let two = F::of(2.0);
    for _ in 0..levels {
        for axis in 0..2 {
            let u = xy[axis] * scale;
            out[i] = haar_sign(u - u.floor());
            i += 1;
        }
        scale *= two;
    }
}

/// `[x, y] || [psi(frac(2^l x)), psi(frac(2^l y))]` for `l = 0..levels`.
pub fn encode_haar<F: Scalar>(xy: [F; 2], levels: usize, include_input: bool) -> Vec<F> {
    let mut out = vec![F::zero(); 2 * levels + if include_input { 2 } else { 0 }];
    encode_into(xy, levels, include_input, &mut out);
    out
}
