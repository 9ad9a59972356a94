use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encodings::EncodingSpec;
use crate::error::{Error, Result};

/// The four benchmarked variants, in canonical (tie-breaking) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Fourier,
    Grid,
    Haar,
    Siren,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Fourier, ModelKind::Grid, ModelKind::Haar, ModelKind::Siren];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Fourier => "fourier",
            ModelKind::Grid => "grid",
            ModelKind::Haar => "haar",
            ModelKind::Siren => "siren",
        }
    }

    /// Display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Fourier => "Fourier",
            ModelKind::Grid => "Grid",
            ModelKind::Haar => "Haar",
            ModelKind::Siren => "SIREN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| Error::InvalidInput(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Sine,
    Relu,
}

/// Dense network shape. `depth` counts the activated hidden layers; a linear
/// output layer follows them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub depth: usize,
    pub activation: HiddenActivation,
    pub w0_first: f64,
    pub w0_hidden: f64,
    pub output_dim: usize,
}

impl MlpConfig {
    pub fn siren(input_dim: usize, width: usize, depth: usize, w0_first: f64, w0_hidden: f64) -> Self {
        Self {
            input_dim,
            hidden_width: width,
            depth,
            activation: HiddenActivation::Sine,
            w0_first,
            w0_hidden,
            output_dim: 1,
        }
    }

    pub fn relu(input_dim: usize, width: usize, depth: usize) -> Self {
        Self {
            input_dim,
            hidden_width: width,
            depth,
            activation: HiddenActivation::Relu,
            w0_first: 1.0,
            w0_hidden: 1.0,
            output_dim: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 || self.hidden_width == 0 || self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::Config(format!("invalid network shape {self:?}")));
        }
        Ok(())
    }
}

/// Encoding plus network, with every hyperparameter resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub encoding: EncodingSpec,
    pub mlp: MlpConfig,
}

pub const SIREN_WIDTH: usize = 256;
pub const SIREN_DEPTH: usize = 6;
pub const SIREN_W0_FIRST: f64 = 36.0;
pub const SIREN_W0_HIDDEN: f64 = 1.0;
pub const HEAD_WIDTH: usize = 192;
pub const HEAD_DEPTH: usize = 4;

impl ModelSpec {
    pub fn new(kind: ModelKind, encoding: EncodingSpec, mlp: MlpConfig) -> Result<Self> {
        if mlp.input_dim != encoding.output_dim() {
            return Err(Error::Config(format!(
                "{kind}: network expects {} inputs but encoding yields {}",
                mlp.input_dim,
                encoding.output_dim()
            )));
        }
        mlp.validate()?;
        Ok(Self { kind, encoding, mlp })
    }

    /// Benchmark defaults for `kind`.
    pub fn standard(kind: ModelKind) -> Self {
        let encoding = match kind {
            ModelKind::Fourier => EncodingSpec::fourier(),
            ModelKind::Grid => EncodingSpec::grid(),
            ModelKind::Haar => EncodingSpec::haar(),
            ModelKind::Siren => EncodingSpec::identity(),
        };
        Self::with_shapes(kind, encoding, HEAD_WIDTH, HEAD_DEPTH)
    }

    /// Reduced sizes for gradient checks: width 8, depth 3, 2 grid levels,
    /// 4 Fourier bands.
    pub fn toy(kind: ModelKind) -> Self {
        let mut encoding = match kind {
            ModelKind::Fourier => EncodingSpec::fourier(),
            ModelKind::Grid => EncodingSpec::grid(),
            ModelKind::Haar => EncodingSpec::haar(),
            ModelKind::Siren => EncodingSpec::identity(),
        };
        encoding.bands = 4;
        encoding.levels = if kind == ModelKind::Grid { 2 } else { encoding.levels };
        encoding.grid_init_scale = 0.5;
        let mlp = match kind {
            ModelKind::Siren => MlpConfig::siren(2, 8, 3, SIREN_W0_FIRST, SIREN_W0_HIDDEN),
            _ => MlpConfig::relu(encoding.output_dim(), 8, 3),
        };
        Self { kind, encoding, mlp }
    }

    fn with_shapes(kind: ModelKind, encoding: EncodingSpec, head_width: usize, head_depth: usize) -> Self {
        let mlp = match kind {
            ModelKind::Siren => MlpConfig::siren(2, SIREN_WIDTH, SIREN_DEPTH, SIREN_W0_FIRST, SIREN_W0_HIDDEN),
            _ => MlpConfig::relu(encoding.output_dim(), head_width, head_depth),
        };
        Self { kind, encoding, mlp }
    }
}
