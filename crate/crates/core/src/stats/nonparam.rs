//! Secondary paired and two-sample tests with large-sample p-values.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

fn two_sided_normal(z: f64) -> f64 {
    let n = Normal::standard();
    (2.0 * n.cdf(-z.abs())).min(1.0)
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<(), StatsError> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// Paired t-test on `x - y`.
pub fn paired_t_test(pairs: &[(f64, f64)]) -> Result<TestResult, StatsError> {
    check_finite(pairs.iter().flat_map(|&(a, b)| [a, b]))?;
    let n = pairs.len();
    if n < 2 {
        return Err(StatsError::Empty);
    }
    let d: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        let p_value = if mean == 0.0 { 1.0 } else { 0.0 };
        let statistic = if mean == 0.0 { 0.0 } else { mean.signum() * f64::INFINITY };
        return Ok(TestResult { statistic, p_value, n });
    }
    let t = mean / (var / nf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).map_err(|_| StatsError::NonFinite)?;
    Ok(TestResult {
        statistic: t,
        p_value: (2.0 * dist.cdf(-t.abs())).min(1.0),
        n,
    })
}

/// Mid-ranks (1-based) and the tie correction term `sum(t^3 - t)`.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Wilcoxon signed-rank test; zero differences are dropped. The statistic is `W+`.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<TestResult, StatsError> {
    check_finite(pairs.iter().flat_map(|&(a, b)| [a, b]))?;
    let d: Vec<f64> = pairs.iter().map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Err(StatsError::NoDirectionalSubjects);
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = midranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
    let p_value = if var > 0.0 {
        two_sided_normal((w_plus - mean) / var.sqrt())
    } else {
        1.0
    };
    Ok(TestResult {
        statistic: w_plus,
        p_value,
        n,
    })
}

/// Wilcoxon rank-sum test. The statistic is the rank sum of `x`.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    check_finite(x.iter().chain(y).copied())?;
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::Empty);
    }
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r_x: f64 = ranks[..x.len()].iter().sum();
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let n = n1 + n2;
    let mean = n1 * (n + 1.0) / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let p_value = if var > 0.0 {
        two_sided_normal((r_x - mean) / var.sqrt())
    } else {
        1.0
    };
    Ok(TestResult {
        statistic: r_x,
        p_value,
        n: pooled.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paired_t_matches_hand_computation() {
        // d = [1, 2, 3]: mean 2, sd 1, t = 2 / (1/sqrt 3) = 2 sqrt 3.
        let r = paired_t_test(&[(2.0, 1.0), (4.0, 2.0), (6.0, 3.0)]).unwrap();
        assert!((r.statistic - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!(r.p_value > 0.05 && r.p_value < 0.1);
        assert_eq!(paired_t_test(&[(1.0, 1.0), (2.0, 2.0)]).unwrap().p_value, 1.0);
    }

    #[test]
    fn signed_rank_statistic() {
        let pairs = [(1.0, 0.0), (0.0, 2.0), (3.0, 0.0), (1.0, 1.0)];
        let r = wilcoxon_signed_rank(&pairs).unwrap();
        assert_eq!((r.statistic, r.n), (4.0, 3));
        let all_pos: Vec<(f64, f64)> = (1..=30).map(|i| (i as f64, 0.0)).collect();
        assert!(wilcoxon_signed_rank(&all_pos).unwrap().p_value < 1e-5);
    }

    #[test]
    fn rank_sum_statistic() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.statistic, 3.0);
        let same = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((same.p_value - 1.0).abs() < 1e-12);
    }
}
