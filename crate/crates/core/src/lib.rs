//! Deterministic benchmark for coordinate-based implicit neural
//! representations of grayscale images.
//!
//! Four models (SIREN, Fourier features, Haar features and a multi-resolution
//! grid) are fitted per image on a subsample of train columns and scored on
//! held-out column blocks. See the guide in `book/` for a walkthrough.
//!
//! ```
//! use inr_bench::splits::{blocked_cols_mask, test_column_count};
//!
//! let mask = blocked_cols_mask(100, 0.40, 0.05, 7).unwrap();
//! assert_eq!(mask.test_cols.len(), test_column_count(100, 0.40));
//! ```

pub mod corpus;
pub mod encodings;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod numeric;
pub mod rng;
pub mod scalar;
pub mod splits;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    mod preprocessing {}
    #[doc = include_str!("../../../book/src/splits.md")]
    mod splits {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
