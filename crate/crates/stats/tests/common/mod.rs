//! Mann-Whitney oracles shared with the acceptance suite.

/// U of `a` by direct pair counting.
pub fn pair_count_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided permutation p: enumerate every way of splitting the pooled
/// values into groups of the original sizes.
pub fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let k = a.len();
    let centre = (a.len() * b.len()) as f64 / 2.0;
    let observed = (pair_count_u(a, b) - centre).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut left = Vec::with_capacity(k);
        let mut right = Vec::with_capacity(n - k);
        for (i, v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                left.push(*v);
            } else {
                right.push(*v);
            }
        }
        total += 1;
        if (pair_count_u(&left, &right) - centre).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}
