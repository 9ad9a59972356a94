use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::{psnr, MetricRow, CSV_DIGITS, PSNR_CAP};
use crate::corpus::Regime;
use crate::error::{Error, Result};
use crate::network::ModelKind;
use crate::numeric::{fmt_sig, mean, percentile_sorted, sample_sd};

pub const TRIM_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub n: usize,
    pub macro_mean: f64,
    pub macro_sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub trimmed_mean: f64,
    pub micro_psnr: f64,
    pub wins: usize,
    pub outliers: usize,
}

/// Statistics over one set of images: everything, or a single regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeSummary {
    /// `"all"` or a regime name.
    pub scope: String,
    pub n_images: usize,
    pub models: Vec<ModelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scopes: Vec<ScopeSummary>,
}

impl Summary {
    pub fn scope(&self, name: &str) -> Option<&ScopeSummary> {
        self.scopes.iter().find(|s| s.scope == name)
    }
}

impl ScopeSummary {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.model == kind)
    }
}

/// Mean after dropping `ceil(fraction * n)` values from each tail (at least
/// one value is always kept).
pub fn trimmed_mean(values: &[f64], fraction: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let k = ((fraction * n as f64).ceil() as usize).min((n - 1) / 2);
    mean(&v[k..n - k])
}

/// PSNR of the pixel-weighted pooled MSE.
pub fn micro_psnr(rows: &[&MetricRow]) -> f64 {
    let sse: f64 = rows.iter().map(|r| r.mse_test * r.n_test_px as f64).sum();
    let n: usize = rows.iter().map(|r| r.n_test_px).sum();
    psnr(sse / n as f64, 1.0)
}

/// Per-image winner by PSNR; ties go to the earliest model in canonical order.
pub fn rank_wins(rows: &[&MetricRow]) -> BTreeMap<ModelKind, usize> {
    let mut best: BTreeMap<&str, &MetricRow> = BTreeMap::new();
    for &r in rows {
        best.entry(&r.path)
            .and_modify(|b| {
                if r.psnr_test > b.psnr_test || (r.psnr_test == b.psnr_test && r.model < b.model) {
                    *b = r;
                }
            })
            .or_insert(r);
    }
    let mut wins = BTreeMap::new();
    for r in best.values() {
        *wins.entry(r.model).or_insert(0) += 1;
    }
    wins
}

/// Every image must have exactly one row per model that appears anywhere.
pub fn check_paired(rows: &[MetricRow]) -> Result<()> {
    let models: BTreeSet<ModelKind> = rows.iter().map(|r| r.model).collect();
    let mut seen: BTreeMap<&str, BTreeSet<ModelKind>> = BTreeMap::new();
    for r in rows {
        if !seen.entry(&r.path).or_default().insert(r.model) {
            return Err(Error::InvalidInput(format!("duplicate row for ({}, {})", r.path, r.model)));
        }
    }
    let missing: Vec<String> = seen
        .iter()
        .flat_map(|(path, have)| models.difference(have).map(move |m| format!("({path}, {m})")))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::IncompletePairs { missing })
    }
}

fn summarize_scope(scope: &str, rows: &[&MetricRow]) -> ScopeSummary {
    let models: BTreeSet<ModelKind> = rows.iter().map(|r| r.model).collect();
    let wins = rank_wins(rows);
    let n_images = rows.iter().map(|r| r.path.as_str()).collect::<BTreeSet<_>>().len();
    let models = models
        .into_iter()
        .map(|model| {
            let mine: Vec<&MetricRow> = rows.iter().copied().filter(|r| r.model == model).collect();
            let mut p: Vec<f64> = mine.iter().map(|r| r.psnr_test).collect();
            p.sort_by(f64::total_cmp);
            ModelSummary {
                model,
                n: p.len(),
                macro_mean: mean(&p),
                macro_sd: sample_sd(&p),
                median: percentile_sorted(&p, 50.0),
                q1: percentile_sorted(&p, 25.0),
                q3: percentile_sorted(&p, 75.0),
                trimmed_mean: trimmed_mean(&p, TRIM_FRACTION),
                micro_psnr: micro_psnr(&mine),
                wins: wins.get(&model).copied().unwrap_or(0),
                outliers: p.iter().filter(|&&v| v >= PSNR_CAP).count(),
            }
        })
        .collect();
    ScopeSummary {
        scope: scope.to_string(),
        n_images,
        models,
    }
}

/// Summaries over all rows and then per regime present.
pub fn aggregate(rows: &[MetricRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no metric rows to aggregate".into()));
    }
    check_paired(rows)?;
    let all: Vec<&MetricRow> = rows.iter().collect();
    let mut scopes = vec![summarize_scope("all", &all)];
    for regime in Regime::ALL {
        let sub: Vec<&MetricRow> = rows.iter().filter(|r| r.regime == regime).collect();
        if !sub.is_empty() {
            scopes.push(summarize_scope(regime.as_str(), &sub));
        }
    }
    Ok(Summary { scopes })
}

pub fn write_summary_csv<W: Write>(summary: &Summary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scope", "model", "statistic", "value"])?;
    for s in &summary.scopes {
        for m in &s.models {
            let stats: [(&str, f64); 9] = [
                ("n", m.n as f64),
                ("macro_mean", m.macro_mean),
                ("macro_sd", m.macro_sd),
                ("median", m.median),
                ("q1", m.q1),
                ("q3", m.q3),
                ("trimmed_mean_10", m.trimmed_mean),
                ("micro_psnr", m.micro_psnr),
                ("outliers_ge_100db", m.outliers as f64),
            ];
            for (name, v) in stats {
                w.write_record([s.scope.as_str(), m.model.as_str(), name, &fmt_sig(v, CSV_DIGITS)])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<summary.csv>", e))?;
    Ok(())
}

pub fn write_wins_csv<W: Write>(summary: &Summary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scope", "model", "wins", "n_images"])?;
    for s in &summary.scopes {
        for m in &s.models {
            w.write_record([s.scope.as_str(), m.model.as_str(), &m.wins.to_string(), &s.n_images.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<wins.csv>", e))?;
    Ok(())
}

/// Rows at the PSNR cap, for auditing near-constant fields.
pub fn write_outliers_csv<W: Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path", "regime", "model", "psnr_test", "mse_test"])?;
    for r in rows.iter().filter(|r| r.psnr_test >= PSNR_CAP) {
        w.write_record([
            r.path.as_str(),
            r.regime.as_str(),
            r.model.as_str(),
            &fmt_sig(r.psnr_test, CSV_DIGITS),
            &fmt_sig(r.mse_test, CSV_DIGITS),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<outliers.csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(path: &str, regime: Regime, model: ModelKind, mse: f64) -> MetricRow {
        MetricRow {
            path: path.into(),
            regime,
            model,
            height: 10,
            width: 10,
            n_test_px: 40,
            mse_test: mse,
            psnr_test: psnr(mse, 1.0),
            ssim_test: 1.0,
            edge_mae_test: 0.0,
            seed_used: 0,
        }
    }

    #[test]
    fn trim_convention() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(trimmed_mean(&v, 0.10), 5.5);
        assert_eq!(trimmed_mean(&[3.0], 0.10), 3.0);
        assert_eq!(trimmed_mean(&[1.0, 9.0], 0.10), 5.0);
    }

    #[test]
    fn micro_is_pooled_not_averaged() {
        let rows = vec![
            row("a", Regime::Regions, ModelKind::Haar, 1e-2),
            row("b", Regime::Regions, ModelKind::Haar, 1e-4),
        ];
        let s = aggregate(&rows).unwrap();
        let m = s.scope("all").unwrap().model(ModelKind::Haar).unwrap();
        assert!((m.macro_mean - 30.0).abs() < 1e-12);
        assert!((m.micro_psnr - psnr(5.05e-3, 1.0)).abs() < 1e-12);
        assert!((m.micro_psnr - 22.967086218813385).abs() < 1e-9);
    }

    #[test]
    fn equal_mse_micro_equals_macro() {
        let rows = vec![
            row("a", Regime::Regions, ModelKind::Grid, 1e-3),
            row("b", Regime::Regions, ModelKind::Grid, 1e-3),
        ];
        let m = aggregate(&rows).unwrap().scopes[0].models[0].clone();
        assert!((m.micro_psnr - m.macro_mean).abs() < 1e-12);
    }

    #[test]
    fn wins_ties_and_partition() {
        let rows = vec![
            row("a", Regime::Regions, ModelKind::Siren, 1e-3),
            row("a", Regime::Regions, ModelKind::Grid, 1e-3),
            row("b", Regime::AllInOne, ModelKind::Siren, 1e-4),
            row("b", Regime::AllInOne, ModelKind::Grid, 1e-3),
        ];
        let s = aggregate(&rows).unwrap();
        let all = s.scope("all").unwrap();
        assert_eq!(all.model(ModelKind::Grid).unwrap().wins, 1);
        assert_eq!(all.model(ModelKind::Siren).unwrap().wins, 1);
        for scope in &s.scopes {
            assert_eq!(scope.models.iter().map(|m| m.wins).sum::<usize>(), scope.n_images);
        }
    }

    #[test]
    fn missing_model_is_fatal() {
        let rows = vec![
            row("a", Regime::Regions, ModelKind::Siren, 1e-3),
            row("a", Regime::Regions, ModelKind::Grid, 1e-3),
            row("b", Regime::Regions, ModelKind::Siren, 1e-3),
        ];
        match aggregate(&rows) {
            Err(Error::IncompletePairs { missing }) => assert_eq!(missing, vec!["(b, grid)".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn outliers_counted_at_cap() {
        let rows = vec![row("a", Regime::Regions, ModelKind::Haar, 0.0)];
        let s = aggregate(&rows).unwrap();
        assert_eq!(s.scopes[0].models[0].outliers, 1);
        let mut buf = Vec::new();
        write_outliers_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }
}
