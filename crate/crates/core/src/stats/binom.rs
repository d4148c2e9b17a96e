//! Exact upper tails of Binomial(n, 1/2), sign tests and threshold scores.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::StatsError;

/// `P(X >= k)` for `X ~ Binomial(trials, 1/2)` as an exact dyadic rational
/// `numerator / 2^trials`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactTail {
    pub numerator: BigUint,
    pub log2_denominator: u64,
}

impl ExactTail {
    pub fn to_f64(&self) -> f64 {
        dyadic_to_f64(&self.numerator, self.log2_denominator)
    }
}

/// Correctly rounded `n / 2^exp` (outside the subnormal range).
fn dyadic_to_f64(n: &BigUint, exp: u64) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let bits = n.bits();
    let (mantissa, shift) = if bits <= 64 {
        (n.to_u64().expect("fits in 64 bits"), 0i64)
    } else {
        let drop = bits - 64;
        let top = (n >> drop).to_u64().expect("fits in 64 bits");
        // Sticky bit: any discarded 1 bit breaks ties upward; 64 > 53 + 1 keeps rounding exact.
        let sticky = n.trailing_zeros().is_some_and(|tz| tz < drop);
        (top | sticky as u64, drop as i64)
    };
    let mut value = mantissa as f64;
    let mut e = shift - exp as i64;
    while e > 0 {
        let step = e.min(1000);
        value *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        value *= 2f64.powi(-(step as i32));
        e += step;
    }
    value
}

/// `sum_{j >= k} C(trials, j)`.
fn upper_tail_count(trials: u64, k: u64) -> BigUint {
    let mut sum = BigUint::zero();
    // C(n, j) walking down from j = n: C(n, j-1) = C(n, j) * j / (n - j + 1).
    let mut c = BigUint::one();
    let mut j = trials;
    loop {
        sum += &c;
        if j == k || j == 0 {
            break;
        }
        c = c * j / (trials - j + 1);
        j -= 1;
    }
    sum
}

/// Exact upper tail `G(trials, k)`.
pub fn binom_tail_exact(trials: u64, k: u64) -> Result<ExactTail, StatsError> {
    if k > trials {
        return Err(StatsError::TailIndex { trials, k });
    }
    let numerator = if k == 0 {
        BigUint::one() << trials
    } else if k > trials / 2 {
        upper_tail_count(trials, k)
    } else {
        // Shorter sum through the complement.
        (BigUint::one() << trials) - upper_tail_count(trials, trials - k + 1)
    };
    Ok(ExactTail {
        numerator,
        log2_denominator: trials,
    })
}

/// `G(trials, k) = P(X >= k)`, `X ~ Binomial(trials, 1/2)`.
///
/// The smaller of `G(n, k)` and `G(n, n - k + 1)` is rounded directly and the larger is taken
/// as its complement, so `G(n, k) + G(n, n - k + 1) == 1.0` holds in floating point.
pub fn binom_tail(trials: u64, k: u64) -> Result<f64, StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    if k > trials {
        return Err(StatsError::TailIndex { trials, k });
    }
    if k == 0 {
        return Ok(1.0);
    }
    let half = BigUint::one() << (trials - 1);
    let tail = binom_tail_exact(trials, k)?;
    if tail.numerator <= half {
        Ok(tail.to_f64())
    } else {
        let other = binom_tail_exact(trials, trials - k + 1)?;
        Ok(1.0 - other.to_f64())
    }
}

/// Outcome of a two-sided sign test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub n: u64,
    pub n_m: u64,
    pub n_p: u64,
    pub p_value: f64,
}

/// Two-sided sign test `min(1, 2 * G(n, max(n_m, n_p)))` with `n = n_m + n_p`.
pub fn sign_test_counts(n_m: u64, n_p: u64) -> Result<SignTest, StatsError> {
    let n = n_m + n_p;
    if n == 0 {
        return Err(StatsError::NoDirectionalSubjects);
    }
    let p_value = (2.0 * binom_tail(n, n_m.max(n_p))?).min(1.0);
    Ok(SignTest { n, n_m, n_p, p_value })
}

/// Sign test on paired values; pairs with equal values are dropped.
pub fn sign_test(pairs: &[(f64, f64)]) -> Result<SignTest, StatsError> {
    let n_m = pairs.iter().filter(|(m, p)| m > p).count() as u64;
    let n_p = pairs.iter().filter(|(m, p)| p > m).count() as u64;
    sign_test_counts(n_m, n_p)
}

/// Minimal score `k` with `2 * G(n, k) < significance`; every score `>= k` is then significant.
/// `None` when even `k = n` fails.
pub fn threshold_score(n: u64, significance: f64) -> Result<Option<u64>, StatsError> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(StatsError::InvalidSignificance(significance));
    }
    if n == 0 {
        return Ok(None);
    }
    let significant = |k: u64| binom_tail(n, k).map(|g| 2.0 * g < significance);
    if !significant(n)? {
        return Ok(None);
    }
    // G is nonincreasing in k: binary search for the first significant k.
    let (mut lo, mut hi) = (0u64, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if significant(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Some(lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(binom_tail(5, 5).unwrap(), 0.03125);
        assert_eq!(binom_tail(7, 0).unwrap(), 1.0);
        assert_eq!(binom_tail(2, 1).unwrap(), 0.75);
        assert!(2.0 * binom_tail(85, 62).unwrap() < 1e-4);
        assert!(binom_tail(3, 4).is_err());
        assert!(binom_tail(0, 0).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_score(30, 0.05).unwrap(), Some(21));
        assert_eq!(threshold_score(6, 0.05).unwrap(), Some(6));
        for k in 0..=5 {
            assert_eq!(threshold_score(k, 0.05).unwrap(), None);
        }
        assert!(threshold_score(10, 1.0).is_err());
    }

    #[test]
    fn sign_tests() {
        assert!(sign_test_counts(62, 23).unwrap().p_value < 1e-4);
        assert_eq!(sign_test_counts(1, 1).unwrap().p_value, 1.0);
        assert_eq!(sign_test_counts(4, 0).unwrap().p_value, 0.125);
        assert_eq!(sign_test_counts(0, 0).unwrap_err(), StatsError::NoDirectionalSubjects);
        let t = sign_test(&[(2.0, 1.0), (1.0, 1.0), (3.0, 1.0)]).unwrap();
        assert_eq!((t.n, t.n_m, t.n_p), (2, 2, 0));
    }

    #[test]
    fn large_trials_stay_finite() {
        let g = binom_tail(10_000, 5_200).unwrap();
        assert!(g > 0.0 && g < 1e-4);
        assert_eq!(binom_tail(10_000, 5_000).unwrap() + binom_tail(10_000, 5_001).unwrap(), 1.0);
    }
}
