use crate::dist::normal_two_sided;
use crate::{Result, StatsError, TestResult};

/// Pooled two-proportion z-test of `k1/n1` against `k2/n2`.
///
/// The sign of z follows `k1/n1 - k2/n2`.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<TestResult> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::InvalidInput("sample sizes must be positive".into()));
    }
    if k1 > n1 || k2 > n2 {
        return Err(StatsError::InvalidInput(format!(
            "successes exceed trials ({k1}/{n1}, {k2}/{n2})"
        )));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1f + n2f);
    let var = pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f);
    if var <= 0.0 {
        return Err(StatsError::Degenerate(
            "pooled proportion is 0 or 1; z is undefined".into(),
        ));
    }
    let z = (k1 as f64 / n1f - k2 as f64 / n2f) / var.sqrt();
    Ok(TestResult::new(
        "two_proportion_z",
        z,
        normal_two_sided(z),
        n1 as usize,
        n2 as usize,
    ))
}
