use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Half-sample symmetric reflection (`d c b a | a b c d | d c b a`).
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

fn filter_axis(src: &Array2<f64>, taps: &[f64], along_rows: bool) -> Array2<f64> {
    let (h, w) = src.dim();
    let r = (taps.len() / 2) as isize;
    Array2::from_shape_fn((h, w), |(y, x)| {
        taps.iter()
            .enumerate()
            .map(|(k, &t)| {
                let off = k as isize - r;
                let v = if along_rows {
                    src[[reflect(y as isize + off, h), x]]
                } else {
                    src[[y, reflect(x as isize + off, w)]]
                };
                t * v
            })
            .sum()
    })
}

/// Separable Gaussian blur with reflected borders.
pub fn gaussian_filter(src: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    filter_axis(&filter_axis(src, taps, false), taps, true)
}

/// Per-pixel SSIM over the whole image.
pub fn ssim_map(a: ArrayView2<f64>, b: ArrayView2<f64>, data_range: f64) -> Result<Array2<f64>> {
    let (h, w) = a.dim();
    if b.dim() != (h, w) {
        return Err(Error::InvalidInput(format!("ssim: shape {:?} vs {:?}", a.dim(), b.dim())));
    }
    if h < WINDOW || w < WINDOW {
        return Err(Error::InvalidInput(format!(
            "ssim needs at least {WINDOW}x{WINDOW} pixels, image is {h}x{w}"
        )));
    }
    let taps = gaussian_taps(WINDOW, SIGMA);
    let c1 = (K1 * data_range).powi(2);
    let c2 = (K2 * data_range).powi(2);
    let (a, b) = (a.to_owned(), b.to_owned());
    let mu_a = gaussian_filter(&a, &taps);
    let mu_b = gaussian_filter(&b, &taps);
    let aa = gaussian_filter(&(&a * &a), &taps);
    let bb = gaussian_filter(&(&b * &b), &taps);
    let ab = gaussian_filter(&(&a * &b), &taps);
    let mut out = Array2::zeros((h, w));
    Zip::from(&mut out)
        .and(&mu_a)
        .and(&mu_b)
        .and(&aa)
        .and(&bb)
        .and(&ab)
        .for_each(|o, &ma, &mb, &saa, &sbb, &sab| {
            let va = saa - ma * ma;
            let vb = sbb - mb * mb;
            let cov = sab - ma * mb;
            *o = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        });
    Ok(out)
}
