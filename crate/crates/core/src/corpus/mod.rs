//! Image ingestion: decoding, grayscale collapse, robust normalization,
//! regime assignment and modal-size cropping.

mod phantom;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::percentile_sorted;
use crate::rng::fnv1a64;

pub use phantom::{make_phantom, PhantomKind};

/// Guard added to the percentile span so constant images divide cleanly.
pub const NORMALIZE_EPS: f64 = 1e-6;

/// Rec.601 luma weights.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AllInOne,
    Regions,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::AllInOne, Regime::Regions];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::AllInOne => "all_in_one",
            Regime::Regions => "regions",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regions" => Ok(Regime::Regions),
            "all_in_one" | "all-in-one" => Ok(Regime::AllInOne),
            other => Err(Error::InvalidInput(format!("unknown regime `{other}`"))),
        }
    }
}

/// Decoded image before normalization. `pixels` is row-major, interleaved
/// when `channels == 3`.
#[derive(Debug, Clone)]
pub struct RawImage {
    pub path: String,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub bit_depth: u8,
    pub pixels: Vec<u16>,
}

impl RawImage {
    pub fn max_value(&self) -> f64 {
        ((1u32 << self.bit_depth) - 1) as f64
    }
}

/// One normalized grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub path: String,
    pub regime: Regime,
    /// Row-major `height x width`, every value in [0, 1].
    pub field: Array2<f64>,
    pub p1: f64,
    pub p99: f64,
}

impl ImageRecord {
    pub fn height(&self) -> usize {
        self.field.nrows()
    }

    pub fn width(&self) -> usize {
        self.field.ncols()
    }

    /// FNV-1a over the field as row-major little-endian `f32`.
    pub fn digest(&self) -> u64 {
        field_digest(self.field.view())
    }

    pub fn manifest_entry(&self) -> ManifestEntry {
        ManifestEntry {
            path: self.path.clone(),
            regime: self.regime,
            height: self.height(),
            width: self.width(),
            p1: self.p1,
            p99: self.p99,
            digest: format!("{:016x}", self.digest()),
        }
    }
}

pub fn field_digest(field: ArrayView2<f64>) -> u64 {
    let mut bytes = Vec::with_capacity(field.len() * 4);
    for v in field.iter() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fnv1a64(&bytes)
}

/// One JSON-lines record of the corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub regime: Regime,
    pub height: usize,
    pub width: usize,
    pub p1: f64,
    pub p99: f64,
    pub digest: String,
}

/// How files map onto regimes: any path component equal to `regions_dir`
/// places the file in the regions regime, everything else is all-in-one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeRules {
    pub regions_dir: String,
}

impl Default for RegimeRules {
    fn default() -> Self {
        Self {
            regions_dir: "regions".into(),
        }
    }
}

impl RegimeRules {
    pub fn assign(&self, rel_path: &str) -> Regime {
        let mut parts: Vec<&str> = rel_path.split('/').collect();
        parts.pop();
        if parts.iter().any(|p| *p == self.regions_dir) {
            Regime::Regions
        } else {
            Regime::AllInOne
        }
    }
}

/// A scanned, normalized corpus in lexicographic path order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<ImageRecord>,
    pub modal_size: Option<(usize, usize)>,
    /// Files that could not be used, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl Corpus {
    pub fn count(&self, regime: Regime) -> usize {
        self.records.iter().filter(|r| r.regime == regime).count()
    }

    pub fn manifest(&self) -> Vec<ManifestEntry> {
        self.records.iter().map(ImageRecord::manifest_entry).collect()
    }

    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for entry in self.manifest() {
            serde_json::to_writer(&mut out, &entry)?;
            out.push(b'\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&out).map_err(|e| Error::io(path, e))
    }

    /// True when every regions image has the modal size (so one shared
    /// holdout mask can serve all of them).
    pub fn regions_uniform(&self) -> bool {
        match self.modal_size {
            Some((h, w)) => self
                .records
                .iter()
                .filter(|r| r.regime == Regime::Regions)
                .all(|r| r.height() == h && r.width() == w),
            None => false,
        }
    }
}

/// Collapses a raw image to one channel in its native intensity units.
pub fn to_grayscale(raw: &RawImage) -> Result<Array2<f64>> {
    let (h, w) = (raw.height, raw.width);
    if raw.pixels.len() != h * w * raw.channels {
        return Err(Error::RejectedFile {
            path: raw.path.clone(),
            reason: "pixel buffer does not match dimensions".into(),
        });
    }
    match raw.channels {
        1 => Ok(Array2::from_shape_fn((h, w), |(r, c)| {
            f64::from(raw.pixels[r * w + c])
        })),
        3 => Ok(Array2::from_shape_fn((h, w), |(r, c)| {
            let i = (r * w + c) * 3;
            LUMA[0] * f64::from(raw.pixels[i])
                + LUMA[1] * f64::from(raw.pixels[i + 1])
                + LUMA[2] * f64::from(raw.pixels[i + 2])
        })),
        n => Err(Error::RejectedFile {
            path: raw.path.clone(),
            reason: format!("unsupported channel count {n}"),
        }),
    }
}

/// `clip((I - P1) / (P99 - P1 + 1e-6), 0, 1)` with linear-interpolation
/// percentiles over all pixels.
pub fn percentile_normalize(gray: ArrayView2<f64>) -> (Array2<f64>, f64, f64) {
    let mut sorted: Vec<f64> = gray.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let p1 = percentile_sorted(&sorted, 1.0);
    let p99 = percentile_sorted(&sorted, 99.0);
    let span = p99 - p1 + NORMALIZE_EPS;
    let field = gray.mapv(|v| ((v - p1) / span).clamp(0.0, 1.0));
    (field, p1, p99)
}

/// Centered crop to `(th, tw)`; odd margins leave the extra row/column at
/// the bottom/right.
pub fn central_crop(field: ArrayView2<f64>, target: (usize, usize)) -> Result<Array2<f64>> {
    let (h, w) = field.dim();
    let (th, tw) = target;
    if h < th || w < tw {
        return Err(Error::InvalidInput(format!(
            "image {h}x{w} smaller than crop target {th}x{tw}"
        )));
    }
    let r0 = (h - th) / 2;
    let c0 = (w - tw) / 2;
    Ok(field.slice(s![r0..r0 + th, c0..c0 + tw]).to_owned())
}

/// Most frequent size; ties go to the smaller area, then the lexicographically
/// smaller `(h, w)`.
pub fn modal_size<I: IntoIterator<Item = (usize, usize)>>(sizes: I) -> Option<(usize, usize)> {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for s in sizes {
        *counts.entry(s).or_default() += 1;
    }
    counts
        .into_iter()
        .min_by(|(a, na), (b, nb)| {
            nb.cmp(na)
                .then((a.0 * a.1).cmp(&(b.0 * b.1)))
                .then(a.cmp(b))
        })
        .map(|(s, _)| s)
}

pub fn decode_image(root: &Path, rel_path: &str) -> Result<RawImage> {
    let full = root.join(rel_path);
    let img = image::open(&full).map_err(|e| Error::RejectedFile {
        path: rel_path.to_string(),
        reason: e.to_string(),
    })?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let reject = |reason: String| Error::RejectedFile {
        path: rel_path.to_string(),
        reason,
    };
    if height < 8 || width < 8 {
        return Err(reject(format!("image {height}x{width} below 8x8 minimum")));
    }
    use image::DynamicImage as D;
    let (channels, bit_depth, pixels): (usize, u8, Vec<u16>) = match img {
        D::ImageLuma8(b) => (1, 8, b.into_raw().into_iter().map(u16::from).collect()),
        D::ImageLuma16(b) => (1, 16, b.into_raw()),
        D::ImageRgb8(b) => (3, 8, b.into_raw().into_iter().map(u16::from).collect()),
        D::ImageRgb16(b) => (3, 16, b.into_raw()),
        other => {
            return Err(reject(format!(
                "unsupported pixel layout {:?} ({} channels)",
                other.color(),
                other.color().channel_count()
            )))
        }
    };
    Ok(RawImage {
        path: rel_path.to_string(),
        height,
        width,
        channels,
        bit_depth,
        pixels,
    })
}

/// Decode, collapse and normalize one file. 16-bit inputs are scaled to
/// [0, 1] before percentile normalization.
pub fn load_record(root: &Path, rel_path: &str, rules: &RegimeRules) -> Result<ImageRecord> {
    let raw = decode_image(root, rel_path)?;
    let mut gray = to_grayscale(&raw)?;
    if raw.bit_depth == 16 {
        gray.mapv_inplace(|v| v / raw.max_value());
    }
    let (field, p1, p99) = percentile_normalize(gray.view());
    Ok(ImageRecord {
        path: rel_path.to_string(),
        regime: rules.assign(rel_path),
        field,
        p1,
        p99,
    })
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("png" | "tif" | "tiff")
    )
}

/// Relative paths (forward slashes) of every PNG/TIFF below `root`, sorted.
pub fn list_images(root: &Path) -> Result<Vec<String>> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus root is not a directory"),
        ));
    }
    let mut paths = Vec::new();
    for entry in walkdir::WalkDir::new(root) {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if !entry.file_type().is_file() || !is_image_file(entry.path()) {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir yields paths under root");
        let parts: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        paths.push(parts.join("/"));
    }
    paths.sort();
    Ok(paths)
}

pub fn scan_corpus(root: &Path, rules: &RegimeRules) -> Result<Corpus> {
    let paths = list_images(root)?;
    let loaded: Vec<(String, Result<ImageRecord>)> = paths
        .par_iter()
        .map(|p| (p.clone(), load_record(root, p, rules)))
        .collect();

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (path, res) in loaded {
        match res {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("skipping {path}: {e}");
                skipped.push((path, e.to_string()));
            }
        }
    }

    let modal = modal_size(
        records
            .iter()
            .filter(|r| r.regime == Regime::Regions)
            .map(|r| (r.height(), r.width())),
    );

    if let Some(target) = modal {
        let mut kept = Vec::with_capacity(records.len());
        for mut rec in records {
            if rec.regime == Regime::Regions && rec.field.dim() != target {
                match central_crop(rec.field.view(), target) {
                    Ok(f) => rec.field = f,
                    Err(e) => {
                        log::warn!("excluding {}: {e}", rec.path);
                        skipped.push((rec.path.clone(), e.to_string()));
                        continue;
                    }
                }
            }
            kept.push(rec);
        }
        records = kept;
    }

    if records.is_empty() {
        return Err(Error::EmptyCorpus(PathBuf::from(root)));
    }
    Ok(Corpus {
        records,
        modal_size: modal,
        skipped,
    })
}
