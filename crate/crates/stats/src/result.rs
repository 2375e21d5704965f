use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tails {
    Two,
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub tails: Tails,
    /// Present only for t-tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
    pub n1: usize,
    pub n2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_size: Option<f64>,
}

impl TestResult {
    pub(crate) fn new(test_name: &str, statistic: f64, p_value: f64, n1: usize, n2: usize) -> Self {
        Self {
            test_name: test_name.to_string(),
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            tails: Tails::Two,
            df: None,
            n1,
            n2,
            effect_size: None,
        }
    }

    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}
