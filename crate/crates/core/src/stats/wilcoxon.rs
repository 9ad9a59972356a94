use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Largest nonzero-difference count that gets an exact p-value.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    /// Differences left after dropping zeros.
    pub n_nonzero: usize,
    pub p_value: f64,
    pub exact: bool,
    /// All differences were zero.
    pub degenerate: bool,
}

/// 1-based ranks with midranks for ties.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// `P(W+ <= w)` under the null, counting all `2^n` sign assignments of the
/// given ranks. Ranks are doubled so midranks become integers.
pub fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let hits: f64 = counts.iter().take(limit.min(total) + 1).sum();
    hits / 2f64.powi(ranks.len() as i32)
}

/// Two-sided p from the normal approximation with tie-corrected variance and
/// a 0.5 continuity correction.
pub fn normal_approx_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mu = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mu).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Paired Wilcoxon signed-rank test on differences `a - b`.
///
/// Zeros are dropped. Up to [`EXACT_MAX_N`] remaining differences the p-value
/// is exact, `min(1, 2 P(T <= W))`; beyond that it is the normal approximation.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Wilcoxon {
    let nz: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    if nz.is_empty() {
        return Wilcoxon {
            statistic: 0.0,
            w_plus: 0.0,
            n_nonzero: 0,
            p_value: 1.0,
            exact: true,
            degenerate: true,
        };
    }
    let abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = ranks.len() as f64 * (ranks.len() as f64 + 1.0) / 2.0;
    let w = w_plus.min(total - w_plus);
    let exact = nz.len() <= EXACT_MAX_N;
    let p_value = if exact {
        (2.0 * exact_lower_tail(&ranks, w)).min(1.0)
    } else {
        normal_approx_p(&ranks, w)
    };
    Wilcoxon {
        statistic: w,
        w_plus,
        n_nonzero: nz.len(),
        p_value,
        exact,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn all_positive_six() {
        let r = wilcoxon_signed_rank(&[0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn zeros_only_is_degenerate() {
        let r = wilcoxon_signed_rank(&[0.0; 7]);
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn symmetric_pairs() {
        let r = wilcoxon_signed_rank(&[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]);
        assert_eq!(r.w_plus, 10.5);
        assert!(r.p_value >= 0.999);
    }

    #[test]
    fn normal_branch_above_limit() {
        let d: Vec<f64> = (1..=30).map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 }).collect();
        let r = wilcoxon_signed_rank(&d);
        assert!(!r.exact);
        let ranks = midranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let exact = (2.0 * exact_lower_tail(&ranks, r.statistic)).min(1.0);
        assert!((r.p_value - exact).abs() < 0.01);
    }
}
