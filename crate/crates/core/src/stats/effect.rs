use rayon::prelude::*;

use crate::numeric::percentile_sorted;
use crate::rng::{mix_index, Rng};

/// Holm step-down adjustment, returned in input order.
pub fn holm_correct(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut out = vec![0.0; m];
    let mut running = 0.0f64;
    for (j, &i) in order.iter().enumerate() {
        running = running.max(((m - j) as f64 * p_values[i]).min(1.0));
        out[i] = running;
    }
    out
}

/// Sign-based paired effect size `(#{d > 0} - #{d < 0}) / n`.
pub fn cliffs_delta_paired(diffs: &[f64]) -> f64 {
    if diffs.is_empty() {
        return 0.0;
    }
    let pos = diffs.iter().filter(|&&d| d > 0.0).count() as f64;
    let neg = diffs.iter().filter(|&&d| d < 0.0).count() as f64;
    (pos - neg) / diffs.len() as f64
}

/// Classical dominance statistic over two independent samples.
pub fn cliffs_delta_unpaired(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut sb = b.to_vec();
    sb.sort_by(f64::total_cmp);
    let mut dominance = 0i64;
    for &x in a {
        let below = sb.partition_point(|&y| y < x) as i64;
        let above = (sb.len() - sb.partition_point(|&y| y <= x)) as i64;
        dominance += below - above;
    }
    dominance as f64 / (a.len() * b.len()) as f64
}

/// Percentile bootstrap interval over resampled index sets.
///
/// Replicate `i` draws `n` indices with replacement from its own stream
/// `mix_index(seed, i)`, so the result does not depend on thread count.
pub fn bootstrap_ci_indexed<S>(n: usize, statistic: S, resamples: usize, seed: u64, level: f64) -> (f64, f64)
where
    S: Fn(&[usize]) -> f64 + Sync,
{
    assert!(n > 0, "bootstrap of an empty sample");
    let mut reps: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng::new(mix_index(seed, i as u64));
            let idx: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
            statistic(&idx)
        })
        .collect();
    reps.sort_by(f64::total_cmp);
    let tail = 100.0 * (1.0 - level) / 2.0;
    (percentile_sorted(&reps, tail), percentile_sorted(&reps, 100.0 - tail))
}

/// Percentile bootstrap interval of `statistic(values)`.
pub fn bootstrap_ci<S>(values: &[f64], statistic: S, resamples: usize, seed: u64, level: f64) -> (f64, f64)
where
    S: Fn(&[f64]) -> f64 + Sync,
{
    bootstrap_ci_indexed(
        values.len(),
        |idx| {
            let sample: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
            statistic(&sample)
        },
        resamples,
        seed,
        level,
    )
}
