//! Reference implementations used by the integration tests and the
//! acceptance report. Each one is written from the textbook definition with
//! plain loops and shares no code with the library beyond input types.
#![allow(dead_code)]

use std::path::Path;

use inr_bench::network::{Inr, ModelSpec};
use inr_bench::rng::Rng;
use inr_bench::splits::HoldoutMask;
use ndarray::{Array1, Array2};

pub fn random_field(rng: &mut Rng, h: usize, w: usize) -> Array2<f64> {
    Array2::from_shape_fn((h, w), |_| rng.uniform())
}

/// A reconstruction that strays outside [0, 1] now and then.
pub fn random_recon(rng: &mut Rng, h: usize, w: usize) -> Array2<f64> {
    Array2::from_shape_fn((h, w), |_| rng.uniform_in(-0.2, 1.2))
}

fn in_test(mask: &HoldoutMask, c: usize) -> bool {
    mask.test_cols.contains(&c)
}

pub fn naive_mse(truth: &Array2<f64>, recon: &Array2<f64>, mask: &HoldoutMask) -> f64 {
    let (h, w) = truth.dim();
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in 0..h {
        for c in 0..w {
            if in_test(mask, c) {
                let p = recon[[r, c]].max(0.0).min(1.0);
                sum += (p - truth[[r, c]]).powi(2);
                n += 1;
            }
        }
    }
    sum / n as f64
}

pub fn naive_psnr(mse: f64) -> f64 {
    if mse < 1e-10 {
        100.0
    } else {
        (10.0 * (1.0 / mse).log10()).min(100.0)
    }
}

/// Mirror index with the edge sample repeated: -1 -> 0, n -> n-1.
fn mirror(i: i64, n: usize) -> usize {
    let n = n as i64;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

pub fn naive_sobel(f: &Array2<f64>) -> Array2<f64> {
    let (h, w) = f.dim();
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let ky = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let mut out = Array2::zeros((h, w));
    for r in 0..h {
        for c in 0..w {
            let (mut gx, mut gy) = (0.0, 0.0);
            for (i, dy) in (-1i64..=1).enumerate() {
                for (j, dx) in (-1i64..=1).enumerate() {
                    let v = f[[mirror(r as i64 + dy, h), mirror(c as i64 + dx, w)]];
                    gx += kx[i][j] * v;
                    gy += ky[i][j] * v;
                }
            }
            out[[r, c]] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Linear-interpolation percentile (numpy's default).
pub fn naive_percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn naive_edge_mae(truth: &Array2<f64>, recon: &Array2<f64>, mask: &HoldoutMask) -> f64 {
    let (h, w) = truth.dim();
    let mag = naive_sobel(truth);
    let mut test_mags = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if in_test(mask, c) {
                test_mags.push(mag[[r, c]]);
            }
        }
    }
    let thr = naive_percentile(&test_mags, 90.0);
    let (mut sum, mut n) = (0.0, 0);
    for r in 0..h {
        for c in 0..w {
            if in_test(mask, c) && mag[[r, c]] >= thr {
                sum += (truth[[r, c]] - recon[[r, c]].max(0.0).min(1.0)).abs();
                n += 1;
            }
        }
    }
    sum / n as f64
}

/// SSIM with an explicit 11x11 Gaussian window evaluated at every pixel.
pub fn naive_ssim_test(truth: &Array2<f64>, recon: &Array2<f64>, mask: &HoldoutMask) -> f64 {
    let (h, w) = truth.dim();
    let b = recon.mapv(|v| v.max(0.0).min(1.0));
    let mut win = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in win.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (dy, dx) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let c1 = 0.01f64.powi(2);
    let c2 = 0.03f64.powi(2);
    let (mut sum, mut n) = (0.0, 0usize);
    for r in 0..h {
        for c in 0..w {
            if !in_test(mask, c) {
                continue;
            }
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (i, row) in win.iter().enumerate() {
                for (j, &wt) in row.iter().enumerate() {
                    let y = mirror(r as i64 + i as i64 - 5, h);
                    let x = mirror(c as i64 + j as i64 - 5, w);
                    let (va, vb) = (truth[[y, x]], b[[y, x]]);
                    let wt = wt / total;
                    ma += wt * va;
                    mb += wt * vb;
                    saa += wt * va * va;
                    sbb += wt * vb * vb;
                    sab += wt * va * vb;
                }
            }
            let va = saa - ma * ma;
            let vb = sbb - mb * mb;
            let cov = sab - ma * mb;
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            n += 1;
        }
    }
    sum / n as f64
}

/// Two-sided exact signed-rank p-value by walking all `2^n` sign patterns.
pub fn brute_wilcoxon_p(diffs: &[f64]) -> f64 {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nz.len();
    if n == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    // Doubled midrank: 2 * (#less) + (#equal) + 1.
    let rank2: Vec<i64> = abs
        .iter()
        .map(|&a| {
            let less = abs.iter().filter(|&&b| b < a).count() as i64;
            let equal = abs.iter().filter(|&&b| b == a).count() as i64;
            2 * less + equal + 1
        })
        .collect();
    let total: i64 = rank2.iter().sum();
    let w_plus: i64 = nz.iter().zip(&rank2).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for pattern in 0u64..(1 << n) {
        let s: i64 = (0..n).filter(|k| pattern >> k & 1 == 1).map(|k| rank2[k]).sum();
        if s <= w {
            hits += 1;
        }
    }
    (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0)
}

pub fn brute_delta_unpaired(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0i64;
    for &x in a {
        for &y in b {
            s += (x > y) as i64 - (x < y) as i64;
        }
    }
    s as f64 / (a.len() * b.len()) as f64
}

pub struct GradReport {
    pub checked: usize,
    pub worst_rel: f64,
}

/// Central finite differences of `L = sum(u * f(xy))` against the analytic
/// gradient, for every parameter of a toy-size model in f64.
pub fn gradient_check(spec: &ModelSpec, seed: u64) -> GradReport {
    let mut rng = Rng::new(seed ^ 0xfeed);
    let n = 6;
    let xy = Array2::from_shape_fn((n, 2), |_| rng.uniform_in(0.05, 0.95));
    let u = Array1::from_shape_fn(n, |_| rng.uniform_in(-1.0, 1.0));
    let mut model = Inr::<f64>::new(spec, seed);
    let (_, tape) = model.forward(xy.view()).unwrap();
    let analytic = model.backward(xy.view(), &tape, u.view());
    let loss = |m: &Inr<f64>| -> f64 { m.predict(xy.view()).unwrap().iter().zip(&u).map(|(p, w)| p * w).sum() };
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut checked = 0;
    let lens: Vec<usize> = model.tensors().iter().map(|t| t.len()).collect();
    assert_eq!(lens.len(), analytic.len(), "gradient tensor count");
    for (t, &len) in lens.iter().enumerate() {
        assert_eq!(analytic[t].len(), len, "gradient length for tensor {t}");
        for j in 0..len {
            let orig = model.tensors()[t][j];
            model.tensors_mut()[t][j] = orig + h;
            let up = loss(&model);
            model.tensors_mut()[t][j] = orig - h;
            let down = loss(&model);
            model.tensors_mut()[t][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[t][j];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    GradReport {
        checked,
        worst_rel: worst,
    }
}

pub fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
