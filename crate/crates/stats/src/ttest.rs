use crate::describe::{mean, sum_sq_dev};
use crate::dist::student_t_two_sided;
use crate::{Result, StatsError, TestResult};

struct Pooled {
    diff: f64,
    sd: f64,
    n1: usize,
    n2: usize,
}

fn pooled(sample_a: &[f64], sample_b: &[f64]) -> Result<Pooled> {
    let (n1, n2) = (sample_a.len(), sample_b.len());
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::InvalidInput(
            "each sample needs at least two values".into(),
        ));
    }
    if sample_a.iter().chain(sample_b).any(|x| !x.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    let ma = mean(sample_a).unwrap_or_default();
    let mb = mean(sample_b).unwrap_or_default();
    let ss = sum_sq_dev(sample_a, ma) + sum_sq_dev(sample_b, mb);
    let sd = (ss / (n1 + n2 - 2) as f64).sqrt();
    if sd == 0.0 {
        return Err(StatsError::Degenerate("pooled standard deviation is zero".into()));
    }
    Ok(Pooled {
        diff: ma - mb,
        sd,
        n1,
        n2,
    })
}

/// Student's two-sample t-test with pooled variance, df = n1 + n2 - 2.
///
/// The result also carries Cohen's d as its effect size.
pub fn pooled_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<TestResult> {
    let p = pooled(sample_a, sample_b)?;
    let scale = (1.0 / p.n1 as f64 + 1.0 / p.n2 as f64).sqrt();
    let t = p.diff / (p.sd * scale);
    let df = (p.n1 + p.n2 - 2) as f64;
    let mut result = TestResult::new("pooled_t", t, student_t_two_sided(t, df), p.n1, p.n2);
    result.df = Some(df);
    result.effect_size = Some(p.diff / p.sd);
    Ok(result)
}

/// Cohen's d: mean difference over the pooled sd (n1 + n2 - 2 denominator).
pub fn cohens_d(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    let p = pooled(sample_a, sample_b)?;
    Ok(p.diff / p.sd)
}
