//! Per-subject switch-point summaries, score classification and cohort means.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cohort::{Block, Dataset, Treatment};
use crate::error::StatsError;
use crate::stats::binom::threshold_score;

/// Switch points at or below this value in both blocks mark a nonpositive-value product.
pub const NONPOSITIVE_CUTOFF: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualValueRule {
    /// Equal-value products count toward neither score.
    Discard,
    /// Half to each score; on odd counts the extra goes to the smaller score
    /// (to the p-score when both are equal).
    EqualSplit,
    /// In proportion to the existing scores, largest remainder first.
    ProportionalSplit,
}

impl EqualValueRule {
    pub fn label(&self) -> &'static str {
        match self {
            EqualValueRule::Discard => "discard",
            EqualValueRule::EqualSplit => "equal-split",
            EqualValueRule::ProportionalSplit => "proportional-split",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "discard" => Some(Self::Discard),
            "equal-split" => Some(Self::EqualSplit),
            "proportional-split" => Some(Self::ProportionalSplit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub include_nonpositive: bool,
    pub significance: f64,
    pub equal_value_rule: EqualValueRule,
    /// Drop products whose block difference `|m - p|` is at least this value.
    pub outlier_cutoff: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            include_nonpositive: false,
            significance: 0.05,
            equal_value_rule: EqualValueRule::Discard,
            outlier_cutoff: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(StatsError::InvalidSignificance(self.significance));
        }
        match self.outlier_cutoff {
            Some(c) if !(c.is_finite() && c > 0.0) => Err(StatsError::NonFinite),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubjectType {
    MHigh,
    PHigh,
    Unclassified,
}

impl SubjectType {
    pub fn label(&self) -> &'static str {
        match self {
            SubjectType::MHigh => "m-high",
            SubjectType::PHigh => "p-high",
            SubjectType::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSummary {
    pub subject_id: u32,
    pub treatment: Treatment,
    /// Mean over included products; `None` when no product qualifies.
    pub individual_m: Option<f64>,
    pub individual_p: Option<f64>,
    pub n_positive: usize,
    pub n_nonpositive: usize,
    pub n_equal_value: usize,
    pub n_outliers: usize,
    pub abs_m_score: usize,
    pub abs_p_score: usize,
    /// Scores after distributing equal-value products.
    pub adjusted_m_score: usize,
    pub adjusted_p_score: usize,
    /// Number of products entering the threshold test.
    pub k: usize,
    pub threshold: Option<u64>,
    pub subject_type: SubjectType,
}

impl SubjectSummary {
    pub fn is_empty(&self) -> bool {
        self.individual_m.is_none()
    }

    pub fn difference(&self) -> Option<f64> {
        Some(self.individual_m? - self.individual_p?)
    }
}

/// Splits `n` equal-value products between scores `(m, p)`.
pub fn distribute_equal(rule: EqualValueRule, m: usize, p: usize, n: usize) -> (usize, usize) {
    match rule {
        EqualValueRule::Discard => (0, 0),
        EqualValueRule::EqualSplit => {
            let (lo, hi) = (n / 2, n - n / 2);
            if m < p {
                (hi, lo)
            } else {
                (lo, hi)
            }
        }
        EqualValueRule::ProportionalSplit => {
            if m + p == 0 {
                return distribute_equal(EqualValueRule::EqualSplit, m, p, n);
            }
            let total = (m + p) as u128;
            let (n128, m128) = (n as u128, m as u128);
            let base_m = (n128 * m128 / total) as usize;
            let base_p = (n128 * (total - m128) / total) as usize;
            let rem_m = n128 * m128 % total;
            let rem_p = n128 * (total - m128) % total;
            match n - base_m - base_p {
                0 => (base_m, base_p),
                // One leftover: larger remainder wins, then the larger score, then m.
                _ => {
                    let to_m = rem_m > rem_p || (rem_m == rem_p && m >= p);
                    if to_m {
                        (base_m + 1, base_p)
                    } else {
                        (base_m, base_p + 1)
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ProductPair {
    m: f64,
    p: f64,
}

/// Summaries in ascending subject order. Requires a schema-valid dataset.
pub fn summarize_subjects(
    dataset: &Dataset,
    config: &AnalysisConfig,
) -> Result<Vec<SubjectSummary>, StatsError> {
    config.validate()?;
    if dataset.records.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut by_subject: BTreeMap<u32, (Treatment, BTreeMap<u32, (Option<f64>, Option<f64>)>)> =
        BTreeMap::new();
    for r in &dataset.records {
        if !r.switch_point.is_finite() {
            return Err(StatsError::NonFinite);
        }
        let entry = by_subject
            .entry(r.subject_id)
            .or_insert_with(|| (r.treatment, BTreeMap::new()));
        let slot = entry.1.entry(r.product_id).or_insert((None, None));
        match r.block {
            Block::M => slot.0 = Some(r.switch_point),
            Block::P => slot.1 = Some(r.switch_point),
        }
    }
    let subjects: Vec<(u32, Treatment, Vec<ProductPair>)> = by_subject
        .into_iter()
        .map(|(id, (treatment, products))| {
            let pairs = products
                .into_values()
                .filter_map(|(m, p)| Some(ProductPair { m: m?, p: p? }))
                .collect();
            (id, treatment, pairs)
        })
        .collect();
    subjects
        .par_iter()
        .map(|(id, treatment, pairs)| summarize_one(*id, *treatment, pairs, config))
        .collect()
}

fn summarize_one(
    subject_id: u32,
    treatment: Treatment,
    pairs: &[ProductPair],
    config: &AnalysisConfig,
) -> Result<SubjectSummary, StatsError> {
    let nonpositive =
        |pp: &ProductPair| pp.m <= NONPOSITIVE_CUTOFF + 1e-9 && pp.p <= NONPOSITIVE_CUTOFF + 1e-9;
    let n_nonpositive = pairs.iter().filter(|pp| nonpositive(pp)).count();
    let n_positive = pairs.len() - n_nonpositive;
    let mut n_outliers = 0;
    let included: Vec<&ProductPair> = pairs
        .iter()
        .filter(|pp| config.include_nonpositive || !nonpositive(pp))
        .filter(|pp| match config.outlier_cutoff {
            Some(c) if (pp.m - pp.p).abs() >= c => {
                n_outliers += 1;
                false
            }
            _ => true,
        })
        .collect();

    let count = included.len();
    let (individual_m, individual_p) = if count == 0 {
        (None, None)
    } else {
        let n = count as f64;
        (
            Some(included.iter().map(|pp| pp.m).sum::<f64>() / n),
            Some(included.iter().map(|pp| pp.p).sum::<f64>() / n),
        )
    };
    let abs_m_score = included.iter().filter(|pp| pp.m > pp.p).count();
    let abs_p_score = included.iter().filter(|pp| pp.p > pp.m).count();
    let n_equal_value = count - abs_m_score - abs_p_score;
    let (add_m, add_p) =
        distribute_equal(config.equal_value_rule, abs_m_score, abs_p_score, n_equal_value);
    let adjusted_m_score = abs_m_score + add_m;
    let adjusted_p_score = abs_p_score + add_p;
    let k = adjusted_m_score + adjusted_p_score;
    let threshold = threshold_score(k as u64, config.significance)?;
    let subject_type = match threshold {
        Some(t) if adjusted_m_score as u64 >= t => SubjectType::MHigh,
        Some(t) if adjusted_p_score as u64 >= t => SubjectType::PHigh,
        _ => SubjectType::Unclassified,
    };
    Ok(SubjectSummary {
        subject_id,
        treatment,
        individual_m,
        individual_p,
        n_positive,
        n_nonpositive,
        n_equal_value,
        n_outliers,
        abs_m_score,
        abs_p_score,
        adjusted_m_score,
        adjusted_p_score,
        k,
        threshold,
        subject_type,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Treatment,
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortMean {
    /// `"mp"`, `"pm"` or `"pooled"`.
    pub group: String,
    pub n_subjects: usize,
    pub mean_m: f64,
    pub sd_m: f64,
    pub mean_p: f64,
    pub sd_p: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Means and sample standard deviations of individual switch points. Empty summaries are
/// skipped; a group with no remaining subjects is an error.
pub fn cohort_means(
    summaries: &[SubjectSummary],
    by: Grouping,
) -> Result<Vec<CohortMean>, StatsError> {
    let groups: Vec<(String, Option<Treatment>)> = match by {
        Grouping::Pooled => vec![("pooled".into(), None)],
        Grouping::Treatment => vec![
            ("mp".into(), Some(Treatment::Mp)),
            ("pm".into(), Some(Treatment::Pm)),
        ],
    };
    groups
        .into_iter()
        .map(|(group, filter)| {
            let (ms, ps): (Vec<f64>, Vec<f64>) = summaries
                .iter()
                .filter(|s| filter.is_none_or(|t| s.treatment == t))
                .filter_map(|s| Some((s.individual_m?, s.individual_p?)))
                .unzip();
            if ms.is_empty() {
                return Err(StatsError::EmptyGroup(group));
            }
            let (mean_m, sd_m) = mean_sd(&ms);
            let (mean_p, sd_p) = mean_sd(&ps);
            Ok(CohortMean {
                group,
                n_subjects: ms.len(),
                mean_m,
                sd_m,
                mean_p,
                sd_p,
            })
        })
        .collect()
}

/// Empirical CDF support points `(value, P(X <= value))`, sorted ascending.
pub fn cdf_points(values: &[f64]) -> Result<Vec<(f64, f64)>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => out.push((*v, frac)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::SubjectRecord;

    fn dataset(subject: u32, pairs: &[(f64, f64)]) -> Dataset {
        let mut recs = Vec::new();
        for (j, &(m, p)) in pairs.iter().enumerate() {
            for (block, v) in [(Block::M, m), (Block::P, p)] {
                recs.push(SubjectRecord {
                    subject_id: subject,
                    product_id: j as u32 + 1,
                    treatment: Treatment::Mp,
                    block,
                    switch_point: v,
                    market_price: 1.0,
                });
            }
        }
        Dataset::from_records(recs)
    }

    fn summary(pairs: &[(f64, f64)], rule: EqualValueRule) -> SubjectSummary {
        let cfg = AnalysisConfig {
            equal_value_rule: rule,
            ..AnalysisConfig::default()
        };
        summarize_subjects(&dataset(1, pairs), &cfg).unwrap().remove(0)
    }

    #[test]
    fn all_m_higher() {
        let s = summary(&[(3.0, 1.0); 30], EqualValueRule::Discard);
        assert_eq!((s.abs_m_score, s.threshold, s.subject_type), (30, Some(21), SubjectType::MHigh));
    }

    #[test]
    fn worked_example_25_5() {
        let mut pairs = vec![(3.0, 1.0); 25];
        pairs.extend(vec![(1.0, 3.0); 5]);
        let s = summary(&pairs, EqualValueRule::Discard);
        assert_eq!((s.abs_m_score, s.abs_p_score, s.threshold), (25, 5, Some(21)));
        assert_eq!(s.subject_type, SubjectType::MHigh);
    }

    #[test]
    fn sixteen_fourteen_unclassified() {
        let mut pairs = vec![(3.0, 1.0); 16];
        pairs.extend(vec![(1.0, 3.0); 14]);
        assert_eq!(summary(&pairs, EqualValueRule::Discard).subject_type, SubjectType::Unclassified);
    }

    #[test]
    fn nonpositive_only_is_empty() {
        let s = summary(&[(0.01, 0.01); 4], EqualValueRule::Discard);
        assert!(s.is_empty());
        assert_eq!((s.n_positive, s.n_nonpositive, s.k), (0, 4, 0));
        assert_eq!(s.threshold, None);
        assert!(cohort_means(&[s], Grouping::Pooled).is_err());
    }

    #[test]
    fn equal_value_rules() {
        assert_eq!(distribute_equal(EqualValueRule::EqualSplit, 10, 2, 5), (2, 3));
        assert_eq!(distribute_equal(EqualValueRule::EqualSplit, 2, 10, 5), (3, 2));
        assert_eq!(distribute_equal(EqualValueRule::EqualSplit, 4, 4, 3), (1, 2));
        assert_eq!(distribute_equal(EqualValueRule::ProportionalSplit, 3, 1, 4), (3, 1));
        assert_eq!(distribute_equal(EqualValueRule::ProportionalSplit, 1, 1, 3), (2, 1));
        assert_eq!(distribute_equal(EqualValueRule::ProportionalSplit, 0, 0, 3), (1, 2));
        // 20 m vs 0 p with 10 equal: discard classifies, equal split does not.
        let mut pairs = vec![(3.0, 1.0); 20];
        pairs.extend(vec![(2.0, 2.0); 10]);
        assert_eq!(summary(&pairs, EqualValueRule::Discard).subject_type, SubjectType::MHigh);
        let prop = summary(&pairs, EqualValueRule::ProportionalSplit);
        assert_eq!(prop.adjusted_m_score, 30);
    }

    #[test]
    fn single_subject_means() {
        let s = summary(&[(2.5, 2.5); 3], EqualValueRule::Discard);
        let m = cohort_means(&[s], Grouping::Pooled).unwrap();
        assert_eq!((m[0].mean_m, m[0].mean_p, m[0].sd_m), (2.5, 2.5, 0.0));
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(cdf_points(&[1.0, 1.0, 3.0]).unwrap(), vec![(1.0, 2.0 / 3.0), (3.0, 1.0)]);
        assert_eq!(cdf_points(&[]).unwrap_err(), StatsError::Empty);
    }
}
