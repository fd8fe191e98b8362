//! Hypothesis tests, correlations, confidence intervals and the bootstrap
//! used to compare dialogue corpora.

pub mod bootstrap;
pub mod correlation;
pub mod proportion;
pub mod ranksum;
pub mod special;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_score_centroids, bootstrap_score_samples, BootstrapSummary, ScoreSamples};
pub use correlation::{midranks, partial_pearson, pearson, spearman};
pub use proportion::{proportion_test, wilson_ci};
pub use ranksum::{hodges_lehmann, ranksum_exact_p, ranksum_normal_p, wilcoxon_ranksum, EXACT_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RankSumExact,
    RankSumNormal,
    ChiSquaredYates,
    Pearson,
    Spearman,
    PartialPearson,
}

/// Outcome of a test: the statistic, its two-sided p-value and an effect size
/// (location shift, proportion difference or correlation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult<T> {
    pub statistic: T,
    pub p_value: T,
    pub effect: T,
    pub method: Method,
}
