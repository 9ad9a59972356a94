//! Coordinate networks with hand-written gradients, the smooth-l1 objective,
//! AdamW, and the per-image training loop.

pub mod adamw;
pub mod field_io;
pub mod loss;
pub mod mlp;
pub mod model;
pub mod spec;
pub mod train;

pub use adamw::{adamw_step, AdamWConfig, AdamWState};
pub use field_io::{load_field, read_field, save_field, write_field, FieldHeader};
pub use loss::{smooth_l1, smooth_l1_mean, DEFAULT_BETA};
pub use mlp::{Activation, Dense, Mlp};
pub use model::{pixel_coords, Inr};
pub use spec::{HiddenActivation, MlpConfig, ModelKind, ModelSpec};
pub use train::{render_field, train_field, Telemetry, TrainConfig, TrainedField, DEFAULT_EPOCHS};
