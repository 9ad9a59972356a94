use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::effect::{bootstrap_ci, bootstrap_ci_indexed, cliffs_delta_paired, cliffs_delta_unpaired, holm_correct};
use super::wilcoxon::wilcoxon_signed_rank;
use crate::corpus::Regime;
use crate::error::{Error, Result};
use crate::metrics::{check_paired, MetricRow, CSV_DIGITS};
use crate::network::ModelKind;
use crate::numeric::{fmt_sig, mean};
use crate::rng::mix;

use ModelKind::{Fourier, Grid, Haar, Siren};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSet {
    /// All six unordered pairs in canonical order.
    All,
    /// Haar-SIREN, Fourier-SIREN, Haar-Grid, Fourier-Grid, Haar-Fourier.
    Reported,
}

impl PairSet {
    pub fn pairs(self) -> Vec<(ModelKind, ModelKind)> {
        match self {
            PairSet::All => vec![(Fourier, Grid), (Fourier, Haar), (Fourier, Siren), (Grid, Haar), (Grid, Siren), (Haar, Siren)],
            PairSet::Reported => vec![(Haar, Siren), (Fourier, Siren), (Haar, Grid), (Fourier, Grid), (Haar, Fourier)],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairSet::All => "all",
            PairSet::Reported => "reported",
        }
    }
}

impl FromStr for PairSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(PairSet::All),
            "reported" => Ok(PairSet::Reported),
            other => Err(Error::InvalidInput(format!("unknown pair set `{other}` (all, reported)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaVariant {
    /// Sign-based, on per-image differences.
    Paired,
    /// Dominance over the two PSNR samples.
    Unpaired,
}

impl DeltaVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaVariant::Paired => "paired",
            DeltaVariant::Unpaired => "unpaired",
        }
    }
}

impl FromStr for DeltaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paired" => Ok(DeltaVariant::Paired),
            "unpaired" => Ok(DeltaVariant::Unpaired),
            other => Err(Error::InvalidInput(format!("unknown delta variant `{other}` (paired, unpaired)"))),
        }
    }
}

impl fmt::Display for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for DeltaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseOptions {
    pub pairs: PairSet,
    pub per_regime: bool,
    pub delta_resamples: usize,
    pub mean_resamples: usize,
    pub level: f64,
    pub delta: DeltaVariant,
    pub seed: u64,
}

impl Default for PairwiseOptions {
    fn default() -> Self {
        Self {
            pairs: PairSet::All,
            per_regime: true,
            delta_resamples: 400,
            mean_resamples: 10_000,
            level: 0.95,
            delta: DeltaVariant::Paired,
            seed: 0,
        }
    }
}

/// One model-pair comparison within a scope. Differences are `a - b` in dB.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseStat {
    pub model_a: ModelKind,
    pub model_b: ModelKind,
    pub scope: String,
    pub n: usize,
    pub wilcoxon_statistic: f64,
    pub p_value: f64,
    pub p_holm: f64,
    pub degenerate: bool,
    pub cliffs_delta: f64,
    pub delta_ci: (f64, f64),
    pub mean_diff: f64,
    pub mean_diff_ci: (f64, f64),
    pub delta_resamples: usize,
    pub mean_resamples: usize,
    pub seed: u64,
}

impl PairwiseStat {
    pub fn comparison(&self) -> String {
        format!("{}-{}", self.model_a, self.model_b)
    }
}

/// Per-path PSNR for one model.
fn psnr_by_path<'a>(rows: &[&'a MetricRow], model: ModelKind) -> BTreeMap<&'a str, f64> {
    rows.iter()
        .filter(|r| r.model == model)
        .map(|r| (r.path.as_str(), r.psnr_test))
        .collect()
}

fn compare(rows: &[&MetricRow], scope: &str, a: ModelKind, b: ModelKind, opts: &PairwiseOptions) -> PairwiseStat {
    let pa = psnr_by_path(rows, a);
    let pb = psnr_by_path(rows, b);
    let (xs, ys): (Vec<f64>, Vec<f64>) = pa.iter().map(|(p, &x)| (x, pb[p])).unzip();
    let diffs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x - y).collect();
    let w = wilcoxon_signed_rank(&diffs);
    let key = format!("{scope}:{a}-{b}");
    let delta_seed = mix(opts.seed, &format!("delta:{key}"));
    let mean_seed = mix(opts.seed, &format!("meandiff:{key}"));
    let (cliffs_delta, delta_ci) = match opts.delta {
        DeltaVariant::Paired => (
            cliffs_delta_paired(&diffs),
            bootstrap_ci(&diffs, cliffs_delta_paired, opts.delta_resamples, delta_seed, opts.level),
        ),
        DeltaVariant::Unpaired => {
            let stat = |idx: &[usize]| {
                let ra: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
                let rb: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
                cliffs_delta_unpaired(&ra, &rb)
            };
            (
                cliffs_delta_unpaired(&xs, &ys),
                bootstrap_ci_indexed(diffs.len(), stat, opts.delta_resamples, delta_seed, opts.level),
            )
        }
    };
    PairwiseStat {
        model_a: a,
        model_b: b,
        scope: scope.to_string(),
        n: diffs.len(),
        wilcoxon_statistic: w.statistic,
        p_value: w.p_value,
        p_holm: w.p_value,
        degenerate: w.degenerate,
        cliffs_delta,
        delta_ci,
        mean_diff: mean(&diffs),
        mean_diff_ci: bootstrap_ci(&diffs, mean, opts.mean_resamples, mean_seed, opts.level),
        delta_resamples: opts.delta_resamples,
        mean_resamples: opts.mean_resamples,
        seed: opts.seed,
    }
}

/// Pairwise tests over `"all"` images and, optionally, each regime. Holm
/// correction is applied within each scope.
pub fn pairwise_suite(rows: &[MetricRow], opts: &PairwiseOptions) -> Result<Vec<PairwiseStat>> {
    pairwise_for_pairs(rows, &opts.pairs.pairs(), opts)
}

/// [`pairwise_suite`] over an explicit pair list (`opts.pairs` is ignored).
pub fn pairwise_for_pairs(
    rows: &[MetricRow],
    pairs: &[(ModelKind, ModelKind)],
    opts: &PairwiseOptions,
) -> Result<Vec<PairwiseStat>> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no metric rows for pairwise tests".into()));
    }
    check_paired(rows)?;
    let present: Vec<ModelKind> = {
        let mut m: Vec<ModelKind> = rows.iter().map(|r| r.model).collect();
        m.sort();
        m.dedup();
        m
    };
    let absent: Vec<String> = pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|m| !present.contains(m))
        .map(|m| format!("(*, {m})"))
        .collect();
    if !absent.is_empty() {
        let mut missing = absent;
        missing.sort();
        missing.dedup();
        return Err(Error::IncompletePairs { missing });
    }

    let mut scopes: Vec<(String, Vec<&MetricRow>)> = vec![("all".into(), rows.iter().collect())];
    if opts.per_regime {
        for regime in Regime::ALL {
            let sub: Vec<&MetricRow> = rows.iter().filter(|r| r.regime == regime).collect();
            if !sub.is_empty() {
                scopes.push((regime.as_str().into(), sub));
            }
        }
    }
    let mut out = Vec::new();
    for (scope, sub) in &scopes {
        let mut stats: Vec<PairwiseStat> = pairs.iter().map(|&(a, b)| compare(sub, scope, a, b, opts)).collect();
        let adjusted = holm_correct(&stats.iter().map(|s| s.p_value).collect::<Vec<_>>());
        for (s, p) in stats.iter_mut().zip(adjusted) {
            s.p_holm = p;
        }
        out.extend(stats);
    }
    Ok(out)
}

pub const PAIRWISE_HEADER: [&str; 14] = [
    "comparison",
    "regime",
    "n",
    "wilcoxon_W",
    "p",
    "p_holm",
    "cliffs_delta",
    "delta_ci_low",
    "delta_ci_high",
    "meandiff_ci_low",
    "meandiff_ci_high",
    "B_delta",
    "B_mean",
    "seed",
];

pub fn write_pairwise_csv<W: Write>(stats: &[PairwiseStat], out: W) -> Result<()> {
    let f = |v: f64| fmt_sig(v, CSV_DIGITS);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PAIRWISE_HEADER)?;
    for s in stats {
        w.write_record([
            s.comparison(),
            s.scope.clone(),
            s.n.to_string(),
            f(s.wilcoxon_statistic),
            f(s.p_value),
            f(s.p_holm),
            f(s.cliffs_delta),
            f(s.delta_ci.0),
            f(s.delta_ci.1),
            f(s.mean_diff_ci.0),
            f(s.mean_diff_ci.1),
            s.delta_resamples.to_string(),
            s.mean_resamples.to_string(),
            s.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<pairwise.csv>", e))?;
    Ok(())
}
