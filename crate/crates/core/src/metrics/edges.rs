use ndarray::{Array2, ArrayView2};

use super::ssim::reflect;

/// Sobel gradient magnitude `sqrt(gx^2 + gy^2)` with reflected borders.
pub fn sobel_magnitude(field: ArrayView2<f64>) -> Array2<f64> {
    let (h, w) = field.dim();
    let at = |y: isize, x: isize| field[[reflect(y, h), reflect(x, w)]];
    Array2::from_shape_fn((h, w), |(y, x)| {
        let (y, x) = (y as isize, x as isize);
        let gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1))
            - (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
        let gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1))
            - (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
        gx.hypot(gy)
    })
}
