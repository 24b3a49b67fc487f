//! Threshold-free evaluation and multi-dataset statistical comparison.

mod metrics;
mod stats;

pub use metrics::{
    average_precision, average_precision_scores, count_violations, micro_pr_at_threshold,
    Confusion, EvalSummary,
};
pub use stats::{
    friedman_test, nemenyi_cd, nemenyi_q, rank_matrix, ComparisonReport, FriedmanResult,
    RankTable,
};
