//! Held-out-column reconstruction metrics and their aggregation.
//!
//! Every metric clamps the reconstruction to `[0, 1]` first and only looks at
//! pixels whose column is held out.

mod aggregate;
mod edges;
mod ssim;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::corpus::Regime;
use crate::error::{Error, Result};
use crate::network::ModelKind;
use crate::numeric::{fmt_sig, percentile};
use crate::splits::HoldoutMask;

pub use aggregate::{
    aggregate, check_paired, micro_psnr, rank_wins, trimmed_mean, write_outliers_csv, write_summary_csv, write_wins_csv,
    ModelSummary, ScopeSummary, Summary,
};
pub use edges::sobel_magnitude;
pub use ssim::{gaussian_filter, gaussian_taps, reflect, ssim_map, SIGMA as SSIM_SIGMA, WINDOW as SSIM_WINDOW};

pub const PSNR_CAP: f64 = 100.0;
/// Below this MSE the PSNR is reported as [`PSNR_CAP`].
pub const PSNR_MSE_FLOOR: f64 = 1e-10;
pub const EDGE_PERCENTILE: f64 = 90.0;
/// Significant digits for floats in CSV output.
pub const CSV_DIGITS: usize = 9;

pub fn clamp_unit(recon: ArrayView2<f64>) -> Array2<f64> {
    recon.mapv(|v| v.clamp(0.0, 1.0))
}

fn check(truth: &ArrayView2<f64>, recon: &ArrayView2<f64>, mask: &HoldoutMask) -> Result<()> {
    if truth.dim() != recon.dim() {
        return Err(Error::InvalidInput(format!("shape {:?} vs {:?}", truth.dim(), recon.dim())));
    }
    if mask.width != truth.ncols() {
        return Err(Error::InvalidInput(format!("mask width {} vs image width {}", mask.width, truth.ncols())));
    }
    if mask.test_cols.is_empty() || truth.nrows() == 0 {
        return Err(Error::InvalidInput("empty test mask".into()));
    }
    Ok(())
}

/// Mean squared error over held-out columns and the number of pixels used.
pub fn mse_test(truth: ArrayView2<f64>, recon: ArrayView2<f64>, mask: &HoldoutMask) -> Result<(f64, usize)> {
    check(&truth, &recon, mask)?;
    let mut sum = 0.0;
    for row in 0..truth.nrows() {
        for &c in &mask.test_cols {
            let d = recon[[row, c]].clamp(0.0, 1.0) - truth[[row, c]];
            sum += d * d;
        }
    }
    let n = truth.nrows() * mask.test_cols.len();
    Ok((sum / n as f64, n))
}

/// `20 log10(R / sqrt(mse))`, capped at 100 dB.
pub fn psnr(mse: f64, data_range: f64) -> f64 {
    if mse < PSNR_MSE_FLOOR {
        return PSNR_CAP;
    }
    (20.0 * (data_range / mse.sqrt()).log10()).min(PSNR_CAP)
}

/// Mean of the full-image SSIM map over held-out columns.
pub fn ssim_test(truth: ArrayView2<f64>, recon: ArrayView2<f64>, mask: &HoldoutMask) -> Result<f64> {
    check(&truth, &recon, mask)?;
    let map = ssim_map(truth, clamp_unit(recon).view(), 1.0)?;
    let mut sum = 0.0;
    for row in map.rows() {
        for &c in &mask.test_cols {
            sum += row[c];
        }
    }
    Ok(sum / (map.nrows() * mask.test_cols.len()) as f64)
}

/// Mean absolute error on ground-truth edge pixels of held-out columns.
///
/// Edge pixels have a Sobel magnitude at or above the 90th percentile of the
/// magnitudes inside the held-out columns.
pub fn edge_mae_test(truth: ArrayView2<f64>, recon: ArrayView2<f64>, mask: &HoldoutMask) -> Result<f64> {
    check(&truth, &recon, mask)?;
    if truth.nrows() < 3 || truth.ncols() < 3 {
        return Err(Error::InvalidInput("edge MAE needs at least 3x3 pixels".into()));
    }
    let mag = sobel_magnitude(truth);
    let test_mags: Vec<f64> = mag
        .rows()
        .into_iter()
        .flat_map(|row| mask.test_cols.iter().map(move |&c| row[c]))
        .collect();
    let threshold = percentile(&test_mags, EDGE_PERCENTILE);
    let (mut sum, mut count) = (0.0, 0usize);
    for r in 0..truth.nrows() {
        for &c in &mask.test_cols {
            if mag[[r, c]] >= threshold {
                sum += (truth[[r, c]] - recon[[r, c]].clamp(0.0, 1.0)).abs();
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}

/// One evaluated (image, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub path: String,
    pub regime: Regime,
    pub model: ModelKind,
    pub height: usize,
    pub width: usize,
    pub n_test_px: usize,
    pub mse_test: f64,
    pub psnr_test: f64,
    pub ssim_test: f64,
    pub edge_mae_test: f64,
    pub seed_used: u64,
}

pub const METRICS_HEADER: [&str; 11] = [
    "path",
    "regime",
    "model",
    "height",
    "width",
    "n_test_px",
    "mse_test",
    "psnr_test",
    "ssim_test",
    "edge_mae_test",
    "seed_used",
];

impl MetricRow {
    /// Scores a reconstruction against the ground truth.
    pub fn evaluate(
        path: &str,
        regime: Regime,
        model: ModelKind,
        truth: ArrayView2<f64>,
        recon: ArrayView2<f64>,
        mask: &HoldoutMask,
    ) -> Result<Self> {
        let (mse, n) = mse_test(truth, recon, mask)?;
        Ok(Self {
            path: path.to_string(),
            regime,
            model,
            height: truth.nrows(),
            width: truth.ncols(),
            n_test_px: n,
            mse_test: mse,
            psnr_test: psnr(mse, 1.0),
            ssim_test: ssim_test(truth, recon, mask)?,
            edge_mae_test: edge_mae_test(truth, recon, mask)?,
            seed_used: mask.seed_used,
        })
    }

    fn record(&self) -> [String; 11] {
        [
            self.path.clone(),
            self.regime.to_string(),
            self.model.to_string(),
            self.height.to_string(),
            self.width.to_string(),
            self.n_test_px.to_string(),
            fmt_sig(self.mse_test, CSV_DIGITS),
            fmt_sig(self.psnr_test, CSV_DIGITS),
            fmt_sig(self.ssim_test, CSV_DIGITS),
            fmt_sig(self.edge_mae_test, CSV_DIGITS),
            self.seed_used.to_string(),
        ]
    }
}

/// Canonical row order: regime, then path, then model.
pub fn sort_rows(rows: &mut [MetricRow]) {
    rows.sort_by(|a, b| (a.regime, &a.path, a.model).cmp(&(b.regime, &b.path, b.model)));
}

pub fn write_metrics_csv<W: std::io::Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(|e| Error::io("<metrics.csv>", e))?;
    Ok(())
}

pub fn read_metrics_csv<R: std::io::Read>(input: R) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
