//! Analysis pipeline: exact sign tests, subject classification, cohort means, CDFs and
//! fixed-effects regression.

pub mod binom;
pub mod nonparam;
pub mod regression;
pub mod summary;

pub use binom::{binom_tail, binom_tail_exact, sign_test, sign_test_counts, threshold_score, ExactTail, SignTest};
pub use nonparam::{paired_t_test, wilcoxon_rank_sum, wilcoxon_signed_rank, TestResult};
pub use regression::{fe_ols, positive_value_records, Estimate, FixedEffects, RegressionResult};
pub use summary::{
    cdf_points, cohort_means, distribute_equal, summarize_subjects, AnalysisConfig, CohortMean,
    EqualValueRule, Grouping, SubjectSummary, SubjectType,
};
