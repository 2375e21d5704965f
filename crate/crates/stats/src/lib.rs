//! Statistical test kernel for comparing annotation studies.
//!
//! Every test here is two-sided. Results carry the statistic, the p-value,
//! the sample sizes and (where it applies) degrees of freedom or an effect
//! size, so that reports can print them without re-deriving anything.

mod describe;
pub mod dist;
mod error;
mod proportion;
mod rank;
mod result;
mod ttest;

pub use describe::{mean, sample_sd, Summary};
pub use error::{Result, StatsError};
pub use proportion::two_proportion_z;
pub use rank::{
    mann_whitney_u, mann_whitney_u_with, u_statistic, wilcoxon_signed_rank, MwuMethod,
    MwuOptions,
};
pub use result::{Tails, TestResult};
pub use ttest::{cohens_d, pooled_t_test};
