use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::encodings::EncodingSpec;
use crate::error::{Error, Result};
use crate::network::{AdamWConfig, MlpConfig, ModelKind, ModelSpec, TrainConfig};
use crate::stats::{DeltaVariant, PairSet, PairwiseOptions};

/// Environment variable that overrides `out_dir`.
pub const OUT_DIR_ENV: &str = "INRBENCH_OUT_DIR";

/// Comma-separated model list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelList(pub Vec<ModelKind>);

impl FromStr for ModelList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut models = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(ModelKind::from_str)
            .collect::<Result<Vec<_>>>()?;
        models.sort();
        models.dedup();
        if models.is_empty() {
            return Err(Error::Config("model list is empty".into()));
        }
        Ok(ModelList(models))
    }
}

impl fmt::Display for ModelList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|m| m.as_str()).collect();
        f.write_str(&names.join(","))
    }
}

macro_rules! run_config {
    ($($name:ident: $ty:ty = $default:expr, $help:literal;)*) => {
        /// Every knob of a benchmark run. Each field is one config key; CLI
        /// flags use the same names in kebab-case.
        #[derive(Debug, Clone, PartialEq)]
        pub struct RunConfig {
            $(#[doc = $help] pub $name: $ty,)*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                Self { $($name: $default,)* }
            }
        }

        /// `(key, help)` for every config key, in declaration order.
        pub const CONFIG_KEYS: &[(&str, &str)] = &[$((stringify!($name), $help),)*];

        impl RunConfig {
            /// Sets one key from its text form. Dashes in `key` are accepted.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                let key = key.trim().replace('-', "_");
                let value = value.trim();
                match key.as_str() {
                    $(stringify!($name) => {
                        self.$name = value
                            .parse::<$ty>()
                            .map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))?;
                    })*
                    _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
                }
                Ok(())
            }

            pub fn get(&self, key: &str) -> Option<String> {
                match key.replace('-', "_").as_str() {
                    $(stringify!($name) => Some(self.$name.to_string()),)*
                    _ => None,
                }
            }
        }
    };
}

run_config! {
    corpus: String = "corpus".into(), "Root directory of the image corpus";
    out_dir: String = "inrbench-out".into(), "Directory for all run outputs";
    regions_dir: String = "regions".into(), "Directory name whose images form the regions regime";
    global_seed: u64 = 0, "Global seed for every derived random stream";
    holdout_frac: f64 = 0.40, "Fraction of columns held out for testing";
    block_frac: f64 = 0.05, "Holdout block width as a fraction of image width";
    train_sample_perc: f64 = 0.10, "Fraction of train-column pixels used for fitting";
    epochs: usize = 10, "Passes over the train sample";
    lr: f64 = 1e-3, "AdamW learning rate";
    weight_decay: f64 = 1e-6, "AdamW decoupled weight decay";
    adam_beta1: f64 = 0.9, "AdamW first-moment decay";
    adam_beta2: f64 = 0.999, "AdamW second-moment decay";
    adam_eps: f64 = 1e-8, "AdamW denominator guard";
    loss_beta: f64 = 0.01, "Smooth-l1 transition point";
    batch_floor: usize = 65_536, "Lower bound of the adaptive batch size";
    batch_cap: usize = 131_072, "Upper bound of the adaptive batch size";
    models: ModelList = ModelList(ModelKind::ALL.to_vec()), "Comma-separated models to run";
    siren_width: usize = 256, "SIREN hidden width";
    siren_depth: usize = 6, "SIREN hidden layer count";
    siren_w0_first: f64 = 36.0, "SIREN first-layer frequency";
    siren_w0_hidden: f64 = 1.0, "SIREN hidden-layer frequency";
    head_width: usize = 192, "Hidden width of the Fourier/Haar/Grid heads";
    head_depth: usize = 4, "Hidden layer count of the Fourier/Haar/Grid heads";
    fourier_bands: usize = 48, "Fourier frequency count";
    fourier_max_freq: f64 = 24.0, "Largest initial Fourier frequency (cycles per unit)";
    fourier_learnable: bool = true, "Train the Fourier frequencies";
    haar_levels: usize = 8, "Haar dyadic levels";
    haar_include_input: bool = true, "Prepend raw coordinates to the Haar features";
    grid_levels: usize = 8, "Grid pyramid levels";
    grid_feats: usize = 2, "Features per grid level";
    grid_base_resolution: usize = 16, "Cells per side at the coarsest grid level";
    workers: usize = 0, "Worker threads (0 = all cores)";
    dump_recon: bool = false, "Write 16-bit PNG reconstructions";
    save_fields: bool = false, "Write trained-field files";
    pairs: PairSet = PairSet::All, "Pairwise comparisons: all or reported";
    per_regime: bool = true, "Also run pairwise tests within each regime";
    delta_variant: DeltaVariant = DeltaVariant::Paired, "Cliff's delta form: paired or unpaired";
    bootstrap_delta: usize = 400, "Bootstrap resamples for the delta interval";
    bootstrap_mean: usize = 10_000, "Bootstrap resamples for the mean-difference interval";
    ci_level: f64 = 0.95, "Bootstrap interval level";
    inject_nan_task: String = String::new(), "Fault injection: `path:model` whose target gets a NaN";
}

impl RunConfig {
    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Output-directory override from the environment.
    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                self.out_dir = dir;
            }
        }
    }

    /// `(key, value)` for every key, in declaration order.
    pub fn entries(&self) -> Vec<(String, String)> {
        CONFIG_KEYS
            .iter()
            .map(|(k, _)| (k.to_string(), self.get(k).expect("declared key")))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("holdout_frac", self.holdout_frac)?;
        unit("block_frac", self.block_frac)?;
        unit("train_sample_perc", self.train_sample_perc)?;
        unit("ci_level", self.ci_level)?;
        if self.batch_floor == 0 || self.batch_cap < self.batch_floor {
            return Err(Error::Config("need 0 < batch_floor <= batch_cap".into()));
        }
        if self.bootstrap_delta < 100 || self.bootstrap_mean < 100 {
            return Err(Error::Config("bootstrap resamples must be at least 100".into()));
        }
        self.train_config().validate()?;
        for &kind in &self.models.0 {
            let spec = self.model_spec(kind);
            ModelSpec::new(kind, spec.encoding, spec.mlp)?;
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            optimizer: AdamWConfig {
                lr: self.lr,
                weight_decay: self.weight_decay,
                beta1: self.adam_beta1,
                beta2: self.adam_beta2,
                eps: self.adam_eps,
            },
            loss_beta: self.loss_beta,
        }
    }

    pub fn model_spec(&self, kind: ModelKind) -> ModelSpec {
        let mut encoding = match kind {
            ModelKind::Fourier => EncodingSpec::fourier(),
            ModelKind::Grid => EncodingSpec::grid(),
            ModelKind::Haar => EncodingSpec::haar(),
            ModelKind::Siren => EncodingSpec::identity(),
        };
        match kind {
            ModelKind::Fourier => {
                encoding.bands = self.fourier_bands;
                encoding.max_freq = self.fourier_max_freq;
                encoding.learnable = self.fourier_learnable;
            }
            ModelKind::Haar => {
                encoding.levels = self.haar_levels;
                encoding.include_input = self.haar_include_input;
            }
            ModelKind::Grid => {
                encoding.levels = self.grid_levels;
                encoding.feats_per_level = self.grid_feats;
                encoding.base_resolution = self.grid_base_resolution;
            }
            ModelKind::Siren => {}
        }
        let mlp = match kind {
            ModelKind::Siren => MlpConfig::siren(
                2,
                self.siren_width,
                self.siren_depth,
                self.siren_w0_first,
                self.siren_w0_hidden,
            ),
            _ => MlpConfig::relu(encoding.output_dim(), self.head_width, self.head_depth),
        };
        ModelSpec { kind, encoding, mlp }
    }

    pub fn pairwise_options(&self) -> PairwiseOptions {
        PairwiseOptions {
            pairs: self.pairs,
            per_regime: self.per_regime,
            delta_resamples: self.bootstrap_delta,
            mean_resamples: self.bootstrap_mean,
            level: self.ci_level,
            delta: self.delta_variant,
            seed: crate::rng::mix(self.global_seed, "pairwise"),
        }
    }

    /// Requested pairs restricted to the configured models.
    pub fn active_pairs(&self) -> Vec<(ModelKind, ModelKind)> {
        self.pairs
            .pairs()
            .into_iter()
            .filter(|(a, b)| self.models.0.contains(a) && self.models.0.contains(b))
            .collect()
    }

    /// Parsed `inject_nan_task`, split at the last `:`.
    pub fn injected_fault(&self) -> Result<Option<(String, ModelKind)>> {
        if self.inject_nan_task.is_empty() {
            return Ok(None);
        }
        let (path, model) = self
            .inject_nan_task
            .rsplit_once(':')
            .ok_or_else(|| Error::Config("inject_nan_task must look like `path:model`".into()))?;
        Ok(Some((path.to_string(), model.parse()?)))
    }

    pub fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}
