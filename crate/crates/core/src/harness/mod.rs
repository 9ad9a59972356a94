//! Configuration, orchestration and reporting for full benchmark runs.

mod config;
mod demo;
pub mod report;
mod run;

pub use config::{ModelList, RunConfig, CONFIG_KEYS, OUT_DIR_ENV};
pub use demo::{make_demo_corpus, DEMO_SIZE};
pub use run::{
    artifact_stem, prepare_splits, run_benchmark, write_png16, write_timings_csv, InputRecord, PreparedImage,
    RunLedger, RunOutcome, TaskRecord, TaskStatus, Timing, TOOLKIT_VERSION,
};
