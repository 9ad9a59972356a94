//! Plain-text tables in the layout of the benchmark's result tables.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::metrics::{MetricRow, Summary};
use crate::network::ModelKind;
use crate::numeric::mean;

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, "\n{title}\n{}", "-".repeat(title.len()));
}

/// Macro mean +/- SD and micro PSNR per model, one block per scope.
pub fn macro_micro_table(summary: &Summary) -> String {
    let mut out = String::new();
    header(&mut out, "Macro- and micro-averaged PSNR_test (dB)");
    for s in &summary.scopes {
        let _ = writeln!(out, "[{}] n = {}", s.scope, s.n_images);
        let _ = writeln!(out, "  {:<8} {:>18} {:>10}", "Model", "Macro mean +/- SD", "Micro");
        for m in &s.models {
            let _ = writeln!(
                out,
                "  {:<8} {:>9.2} +/- {:<5.2} {:>10.2}",
                m.model.label(),
                m.macro_mean,
                m.macro_sd,
                m.micro_psnr
            );
        }
    }
    out
}

/// Median, IQR and 10% trimmed mean per model.
pub fn robust_table(summary: &Summary) -> String {
    let mut out = String::new();
    header(&mut out, "Robust PSNR statistics (dB)");
    for s in &summary.scopes {
        let _ = writeln!(out, "[{}]", s.scope);
        let _ = writeln!(out, "  {:<8} {:>8} {:>17} {:>12}", "Model", "Median", "IQR", "Trimmed 10%");
        for m in &s.models {
            let _ = writeln!(
                out,
                "  {:<8} {:>8.2} {:>8.2} - {:<6.2} {:>12.2}",
                m.model.label(),
                m.median,
                m.q1,
                m.q3,
                m.trimmed_mean
            );
        }
    }
    out
}

/// Rows at the PSNR cap, per model and scope.
pub fn outliers_table(summary: &Summary) -> String {
    let mut out = String::new();
    header(&mut out, "Outliers (PSNR >= 100 dB)");
    for s in &summary.scopes {
        let cells: Vec<String> = s.models.iter().map(|m| format!("{} {}", m.model.label(), m.outliers)).collect();
        let _ = writeln!(out, "  {:<11} {}", s.scope, cells.join("  "));
    }
    out
}

pub fn wins_table(summary: &Summary) -> String {
    let mut out = String::new();
    header(&mut out, "Wins per regime");
    for s in &summary.scopes {
        let cells: Vec<String> = s.models.iter().map(|m| format!("{} {}", m.model.label(), m.wins)).collect();
        let _ = writeln!(out, "  {:<11} {}  (of {})", s.scope, cells.join("  "), s.n_images);
    }
    out
}

/// Mean SSIM and edge MAE over all rows, per model.
pub fn complementary_table(rows: &[MetricRow]) -> String {
    let mut by_model: BTreeMap<ModelKind, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let e = by_model.entry(r.model).or_default();
        e.0.push(r.ssim_test);
        e.1.push(r.edge_mae_test);
    }
    let mut out = String::new();
    header(&mut out, "Complementary test-only metrics");
    let _ = writeln!(out, "  {:<8} {:>10} {:>10}", "Model", "SSIM", "Edge MAE");
    for (m, (ssim, edge)) in by_model {
        let _ = writeln!(out, "  {:<8} {:>10.4} {:>10.4}", m.label(), mean(&ssim), mean(&edge));
    }
    out
}

pub fn full_report(summary: &Summary, rows: &[MetricRow]) -> String {
    [
        macro_micro_table(summary),
        robust_table(summary),
        complementary_table(rows),
        outliers_table(summary),
        wins_table(summary),
    ]
    .concat()
}
