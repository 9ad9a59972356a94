//! Paired nonparametric comparisons of per-image PSNR.

mod effect;
mod pairwise;
mod wilcoxon;

pub use effect::{bootstrap_ci, bootstrap_ci_indexed, cliffs_delta_paired, cliffs_delta_unpaired, holm_correct};
pub use pairwise::{
    pairwise_for_pairs, pairwise_suite, write_pairwise_csv, DeltaVariant, PairSet, PairwiseOptions, PairwiseStat, PAIRWISE_HEADER,
};
pub use wilcoxon::{exact_lower_tail, midranks, normal_approx_p, wilcoxon_signed_rank, Wilcoxon, EXACT_MAX_N};
