//! Rank-based tests: Mann-Whitney U and Wilcoxon signed-rank.
//!
//! Small samples use the exact permutation distribution, computed by
//! counting subsets over doubled midranks so ties stay integral. Larger
//! samples use the normal approximation with tie-corrected variance and an
//! optional continuity correction.

use crate::dist::normal_two_sided;
use crate::{Result, StatsError, TestResult};

/// How the Mann-Whitney p-value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwuMethod {
    /// Exact when both samples have at most [`EXACT_LIMIT`] values.
    Auto,
    Exact,
    Normal,
}

/// Largest per-sample size for which `Auto` picks the exact distribution.
pub const EXACT_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MwuOptions {
    pub method: MwuMethod,
    pub continuity: bool,
}

impl Default for MwuOptions {
    fn default() -> Self {
        Self {
            method: MwuMethod::Auto,
            continuity: true,
        }
    }
}

/// Midranks (1-based, ties averaged) of `values`, returned doubled so they
/// are integers.
fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share the average rank (start+1+end)/2
        let doubled = (start + 1 + end) as u64;
        for &idx in &order[start..end] {
            ranks[idx] = doubled;
        }
        start = end;
    }
    ranks
}

/// Sum over tie groups of t^3 - t.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        total += t * t * t - t;
        i = j;
    }
    total
}

fn check_finite(xs: &[f64], name: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::InvalidInput(format!("{name} contains non-finite values")));
    }
    Ok(())
}

/// U statistic of `sample_a`: the number of (a, b) pairs with a > b, ties
/// counting one half.
pub fn u_statistic(sample_a: &[f64], sample_b: &[f64]) -> f64 {
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let n1 = sample_a.len() as u64;
    let doubled_rank_sum: u64 = ranks[..sample_a.len()].iter().sum();
    (doubled_rank_sum - n1 * (n1 + 1)) as f64 / 2.0
}

/// Mann-Whitney U test with default options (auto method, continuity
/// correction on). The reported statistic is `min(U_a, U_b)`.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<TestResult> {
    mann_whitney_u_with(sample_a, sample_b, MwuOptions::default())
}

pub fn mann_whitney_u_with(
    sample_a: &[f64],
    sample_b: &[f64],
    opts: MwuOptions,
) -> Result<TestResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(StatsError::InvalidInput("both samples must be non-empty".into()));
    }
    check_finite(sample_a, "sample_a")?;
    check_finite(sample_b, "sample_b")?;
    let first = sample_a[0];
    if sample_a.iter().chain(sample_b).all(|&x| x == first) {
        return Err(StatsError::Degenerate("all values are identical".into()));
    }

    let (n1, n2) = (sample_a.len(), sample_b.len());
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let n1u = n1 as u64;
    let doubled_rank_sum: u64 = ranks[..n1].iter().sum();
    // 2 * U_a, kept integral
    let doubled_u = doubled_rank_sum - n1u * (n1u + 1);
    let u_a = doubled_u as f64 / 2.0;
    let u_b = (n1 * n2) as f64 - u_a;

    let exact = match opts.method {
        MwuMethod::Exact => true,
        MwuMethod::Normal => false,
        MwuMethod::Auto => n1 <= EXACT_LIMIT && n2 <= EXACT_LIMIT,
    };

    let (p, name) = if exact {
        (exact_two_sided(&ranks, n1, doubled_u), "mann_whitney_u_exact")
    } else {
        let n = (n1 + n2) as f64;
        let (n1f, n2f) = (n1 as f64, n2 as f64);
        let mu = n1f * n2f / 2.0;
        let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term(&pooled) / (n * (n - 1.0)));
        if var <= 0.0 {
            return Err(StatsError::Degenerate("zero rank variance".into()));
        }
        let cc = if opts.continuity { 0.5 } else { 0.0 };
        let z = ((u_a - mu).abs() - cc).max(0.0) / var.sqrt();
        (normal_two_sided(z), "mann_whitney_u")
    };

    Ok(TestResult::new(name, u_a.min(u_b), p, n1, n2))
}

/// Exact two-sided p: the share of size-n1 subsets of the pooled doubled
/// ranks whose 2U lies at least as far from its mean as the observed one.
fn exact_two_sided(doubled_ranks: &[u64], n1: usize, observed_doubled_u: u64) -> f64 {
    let max_sum: u64 = doubled_ranks.iter().sum();
    let width = max_sum as usize + 1;
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0f64; width]; n1 + 1];
    counts[0][0] = 1.0;
    for &r in doubled_ranks {
        let r = r as usize;
        for k in (1..=n1).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let src = &lower[k - 1];
            let dst = &mut upper[0];
            for s in (r..width).rev() {
                if src[s - r] != 0.0 {
                    dst[s] += src[s - r];
                }
            }
        }
    }
    let n1u = n1 as u64;
    let n2u = doubled_ranks.len() as u64 - n1u;
    // compare |2U - n1 n2| against observed on the integer scale
    let centre = (n1u * n2u) as i64;
    let observed_dev = (observed_doubled_u as i64 - centre).abs();
    let offset = n1u * (n1u + 1);
    let mut extreme = 0.0;
    let mut total = 0.0;
    for (s, &c) in counts[n1].iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        total += c;
        let doubled_u = s as i64 - offset as i64;
        if (doubled_u - centre).abs() >= observed_dev {
            extreme += c;
        }
    }
    (extreme / total).min(1.0)
}

/// Wilcoxon signed-rank test on paired differences `a[i] - b[i]`.
///
/// Zero differences are dropped. The statistic is `min(W+, W-)`. Exact for
/// up to 20 non-zero differences, normal approximation with tie correction
/// and continuity correction beyond that.
pub fn wilcoxon_signed_rank(sample_a: &[f64], sample_b: &[f64]) -> Result<TestResult> {
    if sample_a.len() != sample_b.len() {
        return Err(StatsError::InvalidInput(format!(
            "paired samples differ in length ({} vs {})",
            sample_a.len(),
            sample_b.len()
        )));
    }
    check_finite(sample_a, "sample_a")?;
    check_finite(sample_b, "sample_b")?;
    let diffs: Vec<f64> = sample_a
        .iter()
        .zip(sample_b)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(StatsError::Degenerate("all paired differences are zero".into()));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_midranks(&abs);
    let doubled_w_plus: u64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let n = diffs.len();
    let nf = n as f64;
    let w_plus = doubled_w_plus as f64 / 2.0;
    let w_minus = nf * (nf + 1.0) / 2.0 - w_plus;

    let p = if n <= 20 {
        // sign flips are equally likely; count sums over all subsets
        let total_doubled: u64 = ranks.iter().sum();
        let mut counts = vec![0f64; total_doubled as usize + 1];
        counts[0] = 1.0;
        for &r in &ranks {
            let r = r as usize;
            for s in (r..counts.len()).rev() {
                counts[s] += counts[s - r];
            }
        }
        let centre = total_doubled as i64;
        let observed = (2 * doubled_w_plus as i64 - centre).abs();
        let (mut extreme, mut all) = (0.0, 0.0);
        for (s, &c) in counts.iter().enumerate() {
            all += c;
            if (2 * s as i64 - centre).abs() >= observed {
                extreme += c;
            }
        }
        (extreme / all).min(1.0)
    } else {
        let mu = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&abs) / 48.0;
        if var <= 0.0 {
            return Err(StatsError::Degenerate("zero rank variance".into()));
        }
        let z = ((w_plus - mu).abs() - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z)
    };
    Ok(TestResult::new(
        "wilcoxon_signed_rank",
        w_plus.min(w_minus),
        p,
        sample_a.len(),
        sample_b.len(),
    ))
}
