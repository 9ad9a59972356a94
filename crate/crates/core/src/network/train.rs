use std::time::Instant;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::adamw::{adamw_step, AdamWConfig, AdamWState};
use super::loss::{smooth_l1_mean, DEFAULT_BETA};
use super::model::{pixel_coords, Inr};
use super::spec::ModelSpec;
use crate::corpus::ImageRecord;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::splits::TrainSample;

pub const DEFAULT_EPOCHS: usize = 10;
const RENDER_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: AdamWConfig,
    pub loss_beta: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            optimizer: AdamWConfig::default(),
            loss_beta: DEFAULT_BETA,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let o = &self.optimizer;
        if self.epochs == 0 || !(self.loss_beta > 0.0) || !(o.lr > 0.0) || !(o.weight_decay >= 0.0) {
            return Err(Error::Config(format!("invalid training configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    /// Mean smooth-l1 over the samples of each epoch.
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
    pub wall_seconds: f64,
}

/// A fitted field plus what it took to fit it.
#[derive(Debug, Clone)]
pub struct TrainedField {
    pub model: Inr<f32>,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub telemetry: Telemetry,
}

impl TrainedField {
    pub fn render(&self) -> Result<Array2<f64>> {
        render_field(&self.model, self.height, self.width)
    }

    pub fn final_loss(&self) -> f64 {
        self.telemetry.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Fits `spec` to the sampled pixels of `record`.
///
/// Every epoch reshuffles the sample and walks it in batches of
/// `sample.batch_size`; the last batch of an epoch may be short.
pub fn train_field(
    record: &ImageRecord,
    sample: &TrainSample,
    spec: &ModelSpec,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainedField> {
    cfg.validate()?;
    if sample.is_empty() {
        return Err(Error::InvalidInput(format!("{}: empty train sample", record.path)));
    }
    let (h, w) = (record.height(), record.width());
    if let Some(&(r, c)) = sample.pixels.iter().find(|&&(r, c)| r >= h || c >= w) {
        return Err(Error::InvalidInput(format!("{}: sample pixel ({r}, {c}) outside {h}x{w}", record.path)));
    }
    let start = Instant::now();
    let mut model = Inr::<f32>::new(spec, seed);
    let coords = pixel_coords::<f32>(&sample.pixels, h, w);
    let targets: Vec<f32> = sample.pixels.iter().map(|&p| record.field[p] as f32).collect();
    let mut state = AdamWState::<f32>::new(model.tensors().iter().map(|t| t.len()));
    let mut rng = Rng::keyed(seed, "shuffle");
    let beta = cfg.loss_beta as f32;
    let batch = sample.batch_size.max(1);
    let mut order: Vec<usize> = (0..sample.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut steps = 0;

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            let xy = coords.select(Axis(0), chunk);
            let target: Vec<f32> = chunk.iter().map(|&i| targets[i]).collect();
            let (pred, tape) = model.forward(xy.view())?;
            let pred = pred.as_slice().expect("standard layout");
            let (loss, dpred) = smooth_l1_mean(pred, &target, beta);
            if !loss.is_finite() {
                return Err(Error::TrainingFailure {
                    epoch,
                    detail: format!("non-finite loss at step {steps}"),
                });
            }
            total += loss * chunk.len() as f64;
            let grads = model.backward(xy.view(), &tape, Array1::from(dpred).view());
            adamw_step(model.tensors_mut(), &grads, &mut state, &cfg.optimizer);
            steps += 1;
        }
        if !model.all_finite() {
            return Err(Error::TrainingFailure {
                epoch,
                detail: "non-finite parameters".into(),
            });
        }
        let mean = total / sample.len() as f64;
        log::trace!("{} {} epoch {epoch}: loss {mean:.6e}", record.path, spec.kind);
        epoch_losses.push(mean);
    }

    Ok(TrainedField {
        model,
        height: h,
        width: w,
        seed,
        telemetry: Telemetry {
            epoch_losses,
            steps,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Evaluates the field at every cell center. Values are not clamped.
pub fn render_field(model: &Inr<f32>, height: usize, width: usize) -> Result<Array2<f64>> {
    let n = height * width;
    let mut out = Vec::with_capacity(n);
    let pixels: Vec<(usize, usize)> = (0..height).flat_map(|r| (0..width).map(move |c| (r, c))).collect();
    for chunk in pixels.chunks(RENDER_CHUNK) {
        let xy = pixel_coords::<f32>(chunk, height, width);
        out.extend(model.predict(xy.view())?.iter().map(|&v| v as f64));
    }
    Ok(Array2::from_shape_vec((height, width), out).expect("one value per pixel"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Regime;
    use crate::network::spec::ModelKind;

    fn record(field: Array2<f64>) -> ImageRecord {
        ImageRecord {
            path: "t.png".into(),
            regime: Regime::Regions,
            field,
            p1: 0.0,
            p99: 1.0,
        }
    }

    fn all_pixels(h: usize, w: usize, batch: usize) -> TrainSample {
        TrainSample {
            pixels: (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect(),
            fraction: 1.0,
            batch_size: batch,
            seed_used: 0,
        }
    }

    #[test]
    fn deterministic_weights() {
        let rec = record(Array2::from_shape_fn((8, 8), |(r, c)| ((r + c) % 3) as f64 / 2.0));
        let sample = all_pixels(8, 8, 16);
        let cfg = TrainConfig {
            epochs: 2,
            ..Default::default()
        };
        for kind in ModelKind::ALL {
            let spec = ModelSpec::toy(kind);
            let a = train_field(&rec, &sample, &spec, &cfg, 5).unwrap();
            let b = train_field(&rec, &sample, &spec, &cfg, 5).unwrap();
            assert_eq!(a.model, b.model);
            assert_eq!(a.telemetry.epoch_losses, b.telemetry.epoch_losses);
            assert_eq!(a.telemetry.steps, 8);
        }
    }

    #[test]
    fn nan_target_is_a_training_failure() {
        let mut field = Array2::zeros((8, 8));
        field[[0, 0]] = f64::NAN;
        let err = train_field(&record(field), &all_pixels(8, 8, 64), &ModelSpec::toy(ModelKind::Haar), &TrainConfig::default(), 1)
            .unwrap_err();
        assert!(matches!(err, Error::TrainingFailure { epoch: 0, .. }));
    }

    #[test]
    fn render_single_pixel() {
        let m = Inr::<f32>::new(&ModelSpec::toy(ModelKind::Siren), 2);
        let r = render_field(&m, 1, 1).unwrap();
        let direct = m.predict(ndarray::array![[0.5f32, 0.5]].view()).unwrap();
        assert_eq!(r[[0, 0]], direct[0] as f64);
    }

    #[test]
    fn rejects_out_of_bounds_sample() {
        let mut s = all_pixels(4, 4, 4);
        s.pixels.push((9, 0));
        let rec = record(Array2::zeros((4, 4)));
        assert!(train_field(&rec, &s, &ModelSpec::toy(ModelKind::Haar), &TrainConfig::default(), 0).is_err());
    }
}
