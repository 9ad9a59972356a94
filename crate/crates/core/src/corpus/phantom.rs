//! Synthetic test images standing in for atlas textures.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use super::{ImageRecord, Regime};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhantomKind {
    /// Sum of isotropic Gaussians.
    Blobs,
    /// Piecewise-constant Voronoi regions.
    Edges,
    /// Thin bright polylines on a dark background.
    Neurites,
    Constant,
}

impl PhantomKind {
    pub const ALL: [PhantomKind; 4] = [
        PhantomKind::Blobs,
        PhantomKind::Edges,
        PhantomKind::Neurites,
        PhantomKind::Constant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhantomKind::Blobs => "blobs",
            PhantomKind::Edges => "edges",
            PhantomKind::Neurites => "neurites",
            PhantomKind::Constant => "constant",
        }
    }
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhantomKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown phantom kind `{s}`")))
    }
}

const NEURITE_BACKGROUND: f64 = 0.05;

/// Deterministic synthetic field with values in [0, 1].
///
/// The record's path is `phantom/<kind>_<seed>` and its regime is
/// `Regions`; callers writing phantoms to disk overwrite both.
pub fn make_phantom(kind: PhantomKind, height: usize, width: usize, seed: u64) -> ImageRecord {
    assert!(height >= 16 && width >= 16, "phantoms need at least 16x16");
    let mut rng = Rng::keyed(seed, kind.as_str());
    let field = match kind {
        PhantomKind::Blobs => blobs(height, width, &mut rng),
        PhantomKind::Edges => edges(height, width, &mut rng),
        PhantomKind::Neurites => neurites(height, width, &mut rng),
        PhantomKind::Constant => Array2::from_elem((height, width), rng.uniform_in(0.2, 0.8)),
    };
    ImageRecord {
        path: format!("phantom/{kind}_{seed}"),
        regime: Regime::Regions,
        field,
        p1: 0.0,
        p99: 1.0,
    }
}

fn blobs(h: usize, w: usize, rng: &mut Rng) -> Array2<f64> {
    let side = h.min(w) as f64;
    let bumps: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.uniform_in(0.0, h as f64),
                rng.uniform_in(0.0, w as f64),
                rng.uniform_in(0.05, 0.15) * side,
                rng.uniform_in(0.3, 1.0),
            )
        })
        .collect();
    let mut f = Array2::from_shape_fn((h, w), |(r, c)| {
        let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
        bumps
            .iter()
            .map(|&(cy, cx, s, a)| {
                let d2 = (y - cy).powi(2) + (x - cx).powi(2);
                a * (-d2 / (2.0 * s * s)).exp()
            })
            .sum::<f64>()
    });
    let max = f.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        f.mapv_inplace(|v| (v / max).clamp(0.0, 1.0));
    }
    f
}

fn edges(h: usize, w: usize, rng: &mut Rng) -> Array2<f64> {
    let n_sites = 5 + rng.below(3);
    let sites: Vec<(f64, f64, f64)> = (0..n_sites)
        .map(|i| {
            // Evenly spaced gray levels.
            let level = 0.1 + 0.8 * i as f64 / (n_sites - 1) as f64;
            (rng.uniform(), rng.uniform(), level)
        })
        .collect();
    Array2::from_shape_fn((h, w), |(r, c)| {
        let (y, x) = ((r as f64 + 0.5) / h as f64, (c as f64 + 0.5) / w as f64);
        sites
            .iter()
            .min_by(|a, b| {
                let da = (a.0 - x).powi(2) + (a.1 - y).powi(2);
                let db = (b.0 - x).powi(2) + (b.1 - y).powi(2);
                da.total_cmp(&db)
            })
            .map(|s| s.2)
            .expect("at least one site")
    })
}

fn neurites(h: usize, w: usize, rng: &mut Rng) -> Array2<f64> {
    let mut f = Array2::from_elem((h, w), NEURITE_BACKGROUND);
    let side = h.min(w) as f64;
    for _ in 0..5 {
        let value = rng.uniform_in(0.9, 1.0);
        let thickness = 1 + rng.below(2);
        let mut y = rng.uniform_in(0.1, 0.9) * h as f64;
        let mut x = rng.uniform_in(0.1, 0.9) * w as f64;
        let mut heading = rng.uniform_in(0.0, std::f64::consts::TAU);
        for _ in 0..5 {
            heading += rng.uniform_in(-0.6, 0.6);
            let len = rng.uniform_in(0.15, 0.3) * side;
            let steps = (len * 4.0).ceil() as usize;
            let (dy, dx) = (heading.sin() * len / steps as f64, heading.cos() * len / steps as f64);
            for _ in 0..steps {
                stamp(&mut f, y, x, thickness, value);
                y += dy;
                x += dx;
            }
            // Reflect off the borders so tracts stay inside the frame.
            if y < 0.0 || y >= h as f64 {
                heading = -heading;
                y = y.clamp(0.0, h as f64 - 1.0);
            }
            if x < 0.0 || x >= w as f64 {
                heading = std::f64::consts::PI - heading;
                x = x.clamp(0.0, w as f64 - 1.0);
            }
        }
    }
    f
}

fn stamp(f: &mut Array2<f64>, y: f64, x: f64, thickness: usize, value: f64) {
    let (h, w) = f.dim();
    let r0 = y.floor() as isize;
    let c0 = x.floor() as isize;
    for dr in 0..thickness as isize {
        for dc in 0..thickness as isize {
            let (r, c) = (r0 + dr, c0 + dc);
            if r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w {
                let cell = &mut f[[r as usize, c as usize]];
                *cell = cell.max(value);
            }
        }
    }
}
