//! Column-blocked holdout masks, train-pixel subsampling and batch sizing.
//!
//! Every split is a pure function of `(path, global_seed)` and the image
//! dimensions, so all models trained on one image see the same mask and the
//! same sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{fnv1a64, mix, splitmix64, Rng};

pub const DEFAULT_ALPHA: f64 = 0.40;
pub const DEFAULT_BLOCK_FRAC: f64 = 0.05;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.10;
pub const BATCH_FLOOR: usize = 65_536;
pub const BATCH_CAP: usize = 131_072;

/// Pseudo-path used to derive the single mask shared by a uniform regions set.
pub const GLOBAL_MASK_PATH: &str = "__global__";

/// Per-file seed: FNV-1a of the path, XOR the global seed, one splitmix64 round.
pub fn file_seed(path: &str, global_seed: u64) -> u64 {
    splitmix64(fnv1a64(path.as_bytes()) ^ global_seed)
}

/// Rounds half away from zero, as `f64::round`.
fn round_count(x: f64) -> usize {
    x.round().max(0.0) as usize
}

/// Number of held-out columns: `clamp(round(alpha * W), 1, W - 1)`.
pub fn test_column_count(width: usize, alpha: f64) -> usize {
    round_count(alpha * width as f64).clamp(1, width - 1)
}

pub fn block_width(width: usize, block_frac: f64) -> usize {
    round_count(block_frac * width as f64).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutMask {
    pub width: usize,
    /// Sorted, unique held-out column indices.
    pub test_cols: Vec<usize>,
    pub alpha: f64,
    pub block_width: usize,
    pub seed_used: u64,
}

impl HoldoutMask {
    pub fn is_test(&self, col: usize) -> bool {
        self.test_cols.binary_search(&col).is_ok()
    }

    /// Boolean lookup table indexed by column.
    pub fn column_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.width];
        for &c in &self.test_cols {
            flags[c] = true;
        }
        flags
    }

    pub fn train_cols(&self) -> Vec<usize> {
        let flags = self.column_flags();
        (0..self.width).filter(|&c| !flags[c]).collect()
    }

    /// Maximal runs of held-out columns as `(start, length)`.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &c in &self.test_cols {
            match runs.last_mut() {
                Some((start, len)) if *start + *len == c => *len += 1,
                _ => runs.push((c, 1)),
            }
        }
        runs
    }

    pub fn digest(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 * (self.test_cols.len() + 1));
        bytes.extend_from_slice(&(self.width as u64).to_le_bytes());
        for &c in &self.test_cols {
            bytes.extend_from_slice(&(c as u64).to_le_bytes());
        }
        fnv1a64(&bytes)
    }
}

/// Holds out `clamp(round(alpha*W), 1, W-1)` columns as contiguous blocks.
///
/// Candidate blocks of width `b = max(1, round(block_frac*W))` start on a
/// `b`-strided lattice; a trailing cell narrower than `b` is only a candidate
/// when the full cells cannot cover the target. Candidates are shuffled and
/// accepted whole while they fit. The remainder is cut from the first
/// remaining candidate (in shuffled order) that touches an accepted block,
/// taking the columns on the touching side, so every run is at least
/// `min(b, T)` wide.
pub fn blocked_cols_mask(width: usize, alpha: f64, block_frac: f64, seed: u64) -> Result<HoldoutMask> {
    if width < 4 {
        return Err(Error::InvalidInput(format!(
            "holdout needs at least 4 columns, got {width}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha {alpha} outside (0, 1)")));
    }
    let target = test_column_count(width, alpha);
    let b = block_width(width, block_frac);

    let full_cells = width / b;
    let mut cells: Vec<(usize, usize)> = (0..full_cells).map(|i| (i * b, b)).collect();
    if full_cells * b < target || full_cells == 0 {
        cells.push((full_cells * b, width - full_cells * b));
    }

    let mut order: Vec<usize> = (0..cells.len()).collect();
    Rng::keyed(seed, "mask").shuffle(&mut order);

    let mut taken = vec![false; cells.len()];
    let mut flags = vec![false; width];
    let mut remaining = target;
    let mut pos = 0;
    while remaining > 0 && pos < order.len() {
        let idx = order[pos];
        let (start, len) = cells[idx];
        if len <= remaining {
            taken[idx] = true;
            flags[start..start + len].iter_mut().for_each(|f| *f = true);
            remaining -= len;
            pos += 1;
            continue;
        }
        // Partial block.
        let any_taken = taken.iter().any(|&t| t);
        let pick = order[pos..]
            .iter()
            .copied()
            .find(|&j| {
                !taken[j]
                    && cells[j].1 >= remaining
                    && (!any_taken
                        || (j > 0 && taken[j - 1])
                        || (j + 1 < cells.len() && taken[j + 1]))
            })
            .unwrap_or(idx);
        let (start, len) = cells[pick];
        let touches_left = pick > 0 && taken[pick - 1];
        let touches_right = pick + 1 < cells.len() && taken[pick + 1];
        let range = if touches_right && !touches_left {
            start + len - remaining..start + len
        } else {
            start..start + remaining
        };
        flags[range].iter_mut().for_each(|f| *f = true);
        remaining = 0;
    }
    debug_assert_eq!(remaining, 0);

    let test_cols: Vec<usize> = (0..width).filter(|&c| flags[c]).collect();
    Ok(HoldoutMask {
        width,
        test_cols,
        alpha,
        block_width: b,
        seed_used: seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSample {
    /// `(row, col)` pairs, sorted row-major, columns all in the train set.
    pub pixels: Vec<(usize, usize)>,
    pub fraction: f64,
    pub batch_size: usize,
    pub seed_used: u64,
}

impl TrainSample {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn digest(&self) -> u64 {
        let mut bytes = Vec::with_capacity(16 * self.pixels.len());
        for &(r, c) in &self.pixels {
            bytes.extend_from_slice(&(r as u64).to_le_bytes());
            bytes.extend_from_slice(&(c as u64).to_le_bytes());
        }
        fnv1a64(&bytes)
    }

    /// Every pixel of every train column (used for full-fit sanity runs).
    pub fn all_train_pixels(height: usize, mask: &HoldoutMask, batch_size: usize) -> Self {
        let train = mask.train_cols();
        let pixels = (0..height)
            .flat_map(|r| train.iter().map(move |&c| (r, c)))
            .collect();
        Self {
            pixels,
            fraction: 1.0,
            batch_size,
            seed_used: 0,
        }
    }
}

pub fn train_sample_size(height: usize, n_train_cols: usize, fraction: f64) -> usize {
    round_count(fraction * (height * n_train_cols) as f64)
        .max(1)
        .min(height * n_train_cols)
}

/// Uniform sample without replacement from the train-column lattice.
pub fn sample_train_pixels(
    height: usize,
    mask: &HoldoutMask,
    fraction: f64,
    batch_size: usize,
    seed: u64,
) -> TrainSample {
    let train = mask.train_cols();
    let n = height * train.len();
    let k = train_sample_size(height, train.len(), fraction);
    let mut rng = Rng::new(mix(seed, "train_px"));
    let mut idx = rng.sample_indices(n, k);
    // Lattice index i maps to (i / n_train, train[i % n_train]), which is
    // monotone in row-major order.
    idx.sort_unstable();
    let pixels = idx
        .into_iter()
        .map(|i| (i / train.len(), train[i % train.len()]))
        .collect();
    TrainSample {
        pixels,
        fraction,
        batch_size,
        seed_used: seed,
    }
}

/// `min(cap, max(floor, floor(H*W*0.10 / 2)))`.
pub fn batch_size_with(height: usize, width: usize, floor: usize, cap: usize) -> usize {
    let adaptive = ((height * width) as f64 * 0.10 / 2.0).floor() as usize;
    cap.min(floor.max(adaptive)).max(1)
}

pub fn batch_size(height: usize, width: usize) -> usize {
    batch_size_with(height, width, BATCH_FLOOR, BATCH_CAP)
}

/// Sidecar record so external tools can check splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub path: String,
    pub width: usize,
    pub alpha: f64,
    pub seed_used: u64,
    /// `(start, length)` runs of held-out columns.
    pub test_runs: Vec<(usize, usize)>,
}

impl MaskSidecar {
    pub fn new(path: &str, mask: &HoldoutMask) -> Self {
        Self {
            path: path.to_string(),
            width: mask.width,
            alpha: mask.alpha,
            seed_used: mask.seed_used,
            test_runs: mask.runs(),
        }
    }

    pub fn test_cols(&self) -> Vec<usize> {
        self.test_runs
            .iter()
            .flat_map(|&(s, l)| s..s + l)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn file_seed_is_stable_and_discriminating() {
        assert_eq!(file_seed("a.png", 1), file_seed("a.png", 1));
        assert_ne!(file_seed("a.png", 1), file_seed("b.png", 1));
        assert_ne!(file_seed("a.png", 1), file_seed("a.png", 2));
        // Frozen value: fnv1a("a.png") ^ 0, one splitmix64 round.
        assert_eq!(file_seed("a.png", 0), splitmix64(fnv1a64(b"a.png")));
    }

    #[test]
    fn small_width_mask() {
        let m = blocked_cols_mask(10, 0.4, DEFAULT_BLOCK_FRAC, 123).unwrap();
        assert_eq!(m.block_width, 1);
        assert_eq!(m.test_cols.len(), 4);
    }

    #[test]
    fn width_100_uses_eight_blocks() {
        for seed in 0..20 {
            let m = blocked_cols_mask(100, 0.4, DEFAULT_BLOCK_FRAC, seed).unwrap();
            assert_eq!(m.block_width, 5);
            assert_eq!(m.test_cols.len(), 40);
            // Blocks sit on the 5-lattice, so every run is a multiple of 5.
            for (s, l) in m.runs() {
                assert_eq!(s % 5, 0);
                assert_eq!(l % 5, 0);
            }
        }
    }

    #[test]
    fn trimmed_block_attaches_to_a_run() {
        // W=101: T=40, b=5 -> 8 full blocks; W=66: T=26, b=3 -> 8 full + 2 columns.
        for seed in 0..50 {
            let m = blocked_cols_mask(66, 0.4, DEFAULT_BLOCK_FRAC, seed).unwrap();
            assert_eq!(m.test_cols.len(), 26);
            assert!(m.runs().iter().all(|&(_, l)| l >= 3), "{:?}", m.runs());
        }
    }

    #[test]
    fn too_narrow_is_an_error() {
        assert!(blocked_cols_mask(3, 0.4, DEFAULT_BLOCK_FRAC, 0).is_err());
    }

    #[test]
    fn extreme_alpha_still_exact() {
        for w in 4..60 {
            let m = blocked_cols_mask(w, 0.97, DEFAULT_BLOCK_FRAC, w as u64).unwrap();
            assert_eq!(m.test_cols.len(), test_column_count(w, 0.97));
            let m = blocked_cols_mask(w, 0.01, DEFAULT_BLOCK_FRAC, w as u64).unwrap();
            assert_eq!(m.test_cols.len(), 1);
        }
    }

    #[test]
    fn sample_size_arithmetic() {
        let mask = HoldoutMask {
            width: 10,
            test_cols: vec![0, 1, 2, 3],
            alpha: 0.4,
            block_width: 1,
            seed_used: 0,
        };
        let s = sample_train_pixels(10, &mask, 0.10, 65_536, 9);
        assert_eq!(s.len(), 6);
        let tiny = sample_train_pixels(10, &mask, 0.001, 65_536, 9);
        assert_eq!(tiny.len(), 1);
        assert_eq!(s, sample_train_pixels(10, &mask, 0.10, 65_536, 9));
    }

    #[test]
    fn batch_size_formula() {
        assert_eq!(batch_size(256, 256), 65_536);
        assert_eq!(batch_size(2048, 2048), 131_072);
        assert_eq!(batch_size(1, 1), 65_536);
    }

    #[test]
    fn sidecar_round_trip() {
        let m = blocked_cols_mask(64, 0.4, DEFAULT_BLOCK_FRAC, 5).unwrap();
        let side = MaskSidecar::new("regions/a.png", &m);
        let json = serde_json::to_string(&side).unwrap();
        let back: MaskSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back.test_cols(), m.test_cols);
    }

    proptest! {
        #[test]
        fn partition_and_exact_count(w in 4usize..600, seed in any::<u64>()) {
            let m = blocked_cols_mask(w, 0.4, DEFAULT_BLOCK_FRAC, seed).unwrap();
            let t = test_column_count(w, 0.4);
            prop_assert_eq!(m.test_cols.len(), t);
            prop_assert_eq!(t, ((0.4 * w as f64).round() as usize).clamp(1, w - 1));
            let train = m.train_cols();
            prop_assert_eq!(train.len() + m.test_cols.len(), w);
            prop_assert!(train.iter().all(|c| !m.is_test(*c)));
            let b = m.block_width;
            prop_assert!(m.runs().iter().all(|&(_, l)| l >= b.min(t)));
        }

        #[test]
        fn sample_never_leaks(h in 1usize..40, w in 4usize..80, seed in any::<u64>()) {
            let m = blocked_cols_mask(w, 0.4, DEFAULT_BLOCK_FRAC, seed).unwrap();
            let s = sample_train_pixels(h, &m, 0.10, batch_size(h, w), seed);
            prop_assert!(s.pixels.iter().all(|&(r, c)| r < h && !m.is_test(c)));
            let mut sorted = s.pixels.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted, s.pixels.clone());
            prop_assert_eq!(s.len(), train_sample_size(h, w - m.test_cols.len(), 0.10));
        }
    }
}
