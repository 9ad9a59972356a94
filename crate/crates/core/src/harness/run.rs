use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::corpus::{field_digest, scan_corpus, Corpus, ImageRecord, Regime, RegimeRules};
use crate::error::{Error, Result};
use crate::metrics::{
    aggregate, read_metrics_csv, sort_rows, write_metrics_csv, write_outliers_csv, write_summary_csv, write_wins_csv, MetricRow, Summary,
};
use crate::network::{save_field, train_field, ModelKind, TrainedField};
use crate::numeric::fmt_sig;
use crate::rng::mix;
use crate::splits::{
    batch_size_with, blocked_cols_mask, file_seed, sample_train_pixels, HoldoutMask, MaskSidecar, TrainSample,
    GLOBAL_MASK_PATH,
};
use crate::stats::{pairwise_for_pairs, write_pairwise_csv, PairwiseStat};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub path: String,
    pub model: ModelKind,
    pub status: TaskStatus,
    pub mask_digest: String,
    pub sample_digest: String,
    /// Digest of the rendered (unclamped) reconstruction.
    pub recon_digest: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub regime: Regime,
    pub digest: String,
    pub mask_digest: String,
    pub sample_digest: String,
    pub sample_len: usize,
}

/// Everything needed to account for a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    pub version: String,
    pub config: Vec<(String, String)>,
    pub modal_size: Option<(usize, usize)>,
    pub regions_global_mask: bool,
    pub inputs: Vec<InputRecord>,
    pub skipped: Vec<(String, String)>,
    pub tasks: Vec<TaskRecord>,
    /// Images left out of summaries and tests because a model failed on them.
    pub excluded_from_stats: Vec<String>,
}

impl RunLedger {
    pub fn failures(&self) -> usize {
        self.tasks.iter().filter(|t| t.status == TaskStatus::Failed).count()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub ledger: RunLedger,
    /// Rows of every successful task, in canonical order.
    pub rows: Vec<MetricRow>,
    pub summary: Option<Summary>,
    pub pairwise: Vec<PairwiseStat>,
    pub timings: Vec<Timing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub path: String,
    pub model: ModelKind,
    pub train_time_s: f64,
    pub steps: usize,
    pub final_loss: f64,
}

/// Split shared by every model of one image.
pub struct PreparedImage<'a> {
    pub record: &'a ImageRecord,
    pub mask: HoldoutMask,
    pub sample: TrainSample,
}

fn hex(x: u64) -> String {
    format!("{x:016x}")
}

/// Masks and train samples for every image. Regions images share one mask
/// when they all have the modal size.
pub fn prepare_splits<'a>(corpus: &'a Corpus, cfg: &RunConfig) -> Result<Vec<PreparedImage<'a>>> {
    let global = corpus.regions_uniform();
    corpus
        .records
        .iter()
        .map(|record| {
            let seed = file_seed(&record.path, cfg.global_seed);
            let mask_seed = if global && record.regime == Regime::Regions {
                file_seed(GLOBAL_MASK_PATH, cfg.global_seed)
            } else {
                seed
            };
            let (h, w) = record.field.dim();
            let mask = blocked_cols_mask(w, cfg.holdout_frac, cfg.block_frac, mask_seed)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", record.path)))?;
            let batch = batch_size_with(h, w, cfg.batch_floor, cfg.batch_cap);
            let sample = sample_train_pixels(h, &mask, cfg.train_sample_perc, batch, seed);
            Ok(PreparedImage { record, mask, sample })
        })
        .collect()
}

struct TaskOutput {
    record: TaskRecord,
    row: Option<MetricRow>,
    timing: Option<Timing>,
}

/// Output name for per-task artifacts: `regions/a.png` -> `regions__a`.
pub fn artifact_stem(path: &str) -> String {
    let stem = match path.rfind('.') {
        Some(i) if i > path.rfind('/').map_or(0, |j| j + 1) => &path[..i],
        _ => path,
    };
    stem.replace('/', "__")
}

/// 16-bit grayscale PNG of `round(clamp(v) * 65535)`.
pub fn write_png16(field: ArrayView2<f64>, path: &Path) -> Result<()> {
    let (h, w) = field.dim();
    let data: Vec<u16> = field.iter().map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16).collect();
    let img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(w as u32, h as u32, data)
        .expect("buffer matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

fn run_task(prep: &PreparedImage, kind: ModelKind, cfg: &RunConfig, fault: &Option<(String, ModelKind)>, out: &Path) -> TaskOutput {
    let record = prep.record;
    let seed = mix(file_seed(&record.path, cfg.global_seed), kind.as_str());
    let mut task = TaskRecord {
        path: record.path.clone(),
        model: kind,
        status: TaskStatus::Pending,
        mask_digest: hex(prep.mask.digest()),
        sample_digest: hex(prep.sample.digest()),
        recon_digest: None,
        error: None,
    };
    let result = (|| -> Result<(TrainedField, Array2<f64>, MetricRow)> {
        let poisoned;
        let target = match fault {
            Some((p, m)) if *p == record.path && *m == kind => {
                let mut r = record.clone();
                if let Some(&px) = prep.sample.pixels.first() {
                    r.field[px] = f64::NAN;
                }
                poisoned = r;
                &poisoned
            }
            _ => record,
        };
        let field = train_field(target, &prep.sample, &cfg.model_spec(kind), &cfg.train_config(), seed)?;
        let recon = field.render()?;
        let row = MetricRow::evaluate(&record.path, record.regime, kind, record.field.view(), recon.view(), &prep.mask)?;
        Ok((field, recon, row))
    })();

    match result {
        Ok((field, recon, row)) => {
            let stem = format!("{}.{}", artifact_stem(&record.path), kind);
            let mut artifact_err = None;
            if cfg.dump_recon {
                if let Err(e) = write_png16(recon.view(), &out.join("recon").join(format!("{stem}.png"))) {
                    artifact_err = Some(e);
                }
            }
            if cfg.save_fields {
                if let Err(e) = save_field(&field, &out.join("fields").join(format!("{stem}.field"))) {
                    artifact_err = Some(e);
                }
            }
            if let Some(e) = artifact_err {
                log::error!("{} {kind}: {e}", record.path);
                task.status = TaskStatus::Failed;
                task.error = Some(e.to_string());
                return TaskOutput {
                    record: task,
                    row: None,
                    timing: None,
                };
            }
            task.status = TaskStatus::Done;
            task.recon_digest = Some(hex(field_digest(recon.view())));
            let timing = Timing {
                path: record.path.clone(),
                model: kind,
                train_time_s: field.telemetry.wall_seconds,
                steps: field.telemetry.steps,
                final_loss: field.final_loss(),
            };
            log::info!("{} {kind}: {:.2} dB", record.path, row.psnr_test);
            TaskOutput {
                record: task,
                row: Some(row),
                timing: Some(timing),
            }
        }
        Err(e) => {
            log::error!("{} {kind}: {e}", record.path);
            task.status = TaskStatus::Failed;
            task.error = Some(e.to_string());
            TaskOutput {
                record: task,
                row: None,
                timing: None,
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn write_timings_csv<W: std::io::Write>(timings: &[Timing], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path", "model", "train_time_s", "steps", "final_loss"])?;
    for t in timings {
        w.write_record([
            t.path.clone(),
            t.model.to_string(),
            format!("{:.3}", t.train_time_s),
            t.steps.to_string(),
            fmt_sig(t.final_loss, 9),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<timings.csv>", e))?;
    Ok(())
}

/// Scans the corpus, fits every configured model to every image, scores the
/// held-out columns and writes all reports under `cfg.out_dir`.
///
/// Task failures are recorded in the ledger and do not stop the run; images
/// with a failed task are left out of the summary and the pairwise tests.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let fault = cfg.injected_fault()?;
    let out = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    for (on, sub) in [(cfg.dump_recon, "recon"), (cfg.save_fields, "fields")] {
        if on {
            let d = out.join(sub);
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
    }

    let rules = RegimeRules {
        regions_dir: cfg.regions_dir.clone(),
    };
    let corpus = scan_corpus(Path::new(&cfg.corpus), &rules)?;
    corpus.write_manifest(&out.join("manifest.jsonl"))?;
    let prepared = prepare_splits(&corpus, cfg)?;

    let mut masks = Vec::new();
    for p in &prepared {
        serde_json::to_writer(&mut masks, &MaskSidecar::new(&p.record.path, &p.mask))?;
        masks.push(b'\n');
    }
    write_file(&out.join("masks.jsonl"), &masks)?;

    let tasks: Vec<(usize, ModelKind)> = (0..prepared.len())
        .flat_map(|i| cfg.models.0.iter().map(move |&m| (i, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    log::info!("{} images x {} models on {} workers", prepared.len(), cfg.models.0.len(), cfg.worker_count());
    let outputs: Vec<TaskOutput> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, m)| run_task(&prepared[i], m, cfg, &fault, &out))
            .collect()
    });

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut records = Vec::new();
    for o in outputs {
        records.push(o.record);
        rows.extend(o.row);
        timings.extend(o.timing);
    }
    sort_rows(&mut rows);
    // Downstream statistics use the values as written, so `stats` on
    // metrics.csv reproduces pairwise.csv exactly.
    let metrics_bytes = csv_bytes(|b| write_metrics_csv(&rows, b))?;
    let rows = read_metrics_csv(metrics_bytes.as_slice())?;

    let mut excluded: Vec<String> = records
        .iter()
        .filter(|t| t.status == TaskStatus::Failed)
        .map(|t| t.path.clone())
        .collect();
    excluded.sort();
    excluded.dedup();
    let complete: Vec<MetricRow> = rows.iter().filter(|r| excluded.binary_search(&r.path).is_err()).cloned().collect();

    write_file(&out.join("metrics.csv"), &metrics_bytes)?;
    write_file(&out.join("outliers.csv"), &csv_bytes(|b| write_outliers_csv(&rows, b))?)?;
    write_file(&out.join("timings.csv"), &csv_bytes(|b| write_timings_csv(&timings, b))?)?;

    let summary = if complete.is_empty() { None } else { Some(aggregate(&complete)?) };
    let empty_summary = Summary { scopes: Vec::new() };
    let s = summary.as_ref().unwrap_or(&empty_summary);
    write_file(&out.join("summary.csv"), &csv_bytes(|b| write_summary_csv(s, b))?)?;
    write_file(&out.join("wins.csv"), &csv_bytes(|b| write_wins_csv(s, b))?)?;

    let pairs = cfg.active_pairs();
    let pairwise = if complete.is_empty() || pairs.is_empty() {
        Vec::new()
    } else {
        pool.install(|| pairwise_for_pairs(&complete, &pairs, &cfg.pairwise_options()))?
    };
    write_file(&out.join("pairwise.csv"), &csv_bytes(|b| write_pairwise_csv(&pairwise, b))?)?;

    let ledger = RunLedger {
        version: TOOLKIT_VERSION.to_string(),
        config: cfg.entries(),
        modal_size: corpus.modal_size,
        regions_global_mask: corpus.regions_uniform(),
        inputs: prepared
            .iter()
            .map(|p| InputRecord {
                path: p.record.path.clone(),
                regime: p.record.regime,
                digest: hex(p.record.digest()),
                mask_digest: hex(p.mask.digest()),
                sample_digest: hex(p.sample.digest()),
                sample_len: p.sample.len(),
            })
            .collect(),
        skipped: corpus.skipped.clone(),
        tasks: records,
        excluded_from_stats: excluded,
    };
    write_file(&out.join("ledger.json"), &serde_json::to_vec_pretty(&ledger)?)?;

    Ok(RunOutcome {
        ledger,
        rows,
        summary,
        pairwise,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artifact_names() {
        assert_eq!(artifact_stem("regions/edges_00.png"), "regions__edges_00");
        assert_eq!(artifact_stem("a.b/c"), "a.b__c");
        assert_eq!(artifact_stem("plain"), "plain");
    }
}
