//! Summary statistics and the paired sign test used for trend checks.

use statrs::distribution::{Binomial, DiscreteCDF};

pub const ALPHA: f64 = 0.05;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1); 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub positives: u64,
    pub negatives: u64,
    pub ties: u64,
    /// One-sided p-value for "differences tend to be positive".
    pub p_greater: f64,
    /// One-sided p-value for "differences tend to be negative".
    pub p_less: f64,
}

/// Exact sign test on paired differences; exact zeros are dropped.
pub fn sign_test(diffs: &[f64]) -> SignTest {
    let positives = diffs.iter().filter(|&&d| d > 0.0).count() as u64;
    let negatives = diffs.iter().filter(|&&d| d < 0.0).count() as u64;
    let ties = diffs.len() as u64 - positives - negatives;
    let n = positives + negatives;
    let upper_tail = |k: u64| -> f64 {
        if n == 0 || k == 0 {
            return 1.0;
        }
        let b = Binomial::new(0.5, n).expect("valid binomial");
        // P(X >= k) = 1 - P(X <= k - 1)
        b.sf(k - 1)
    };
    SignTest { positives, negatives, ties, p_greater: upper_tail(positives), p_less: upper_tail(negatives) }
}

fn diffs(before: &[f64], after: &[f64]) -> Vec<f64> {
    assert_eq!(before.len(), after.len(), "paired samples must align");
    after.iter().zip(before).map(|(a, b)| a - b).collect()
}

/// `after` is significantly lower than `before` at level `ALPHA`.
pub fn significant_decrease(before: &[f64], after: &[f64]) -> bool {
    sign_test(&diffs(before, after)).p_less < ALPHA
}

/// `after` is significantly higher than `before` at level `ALPHA`.
pub fn significant_increase(before: &[f64], after: &[f64]) -> bool {
    sign_test(&diffs(before, after)).p_greater < ALPHA
}

/// No consecutive pair of paired series shows a significant decrease.
pub fn nondecreasing(series: &[Vec<f64>]) -> bool {
    series.windows(2).all(|w| !significant_decrease(&w[0], &w[1]))
}

/// No consecutive pair shows a significant increase.
pub fn nonincreasing(series: &[Vec<f64>]) -> bool {
    series.windows(2).all(|w| !significant_increase(&w[0], &w[1]))
}

/// Every consecutive pair shows a significant decrease.
pub fn strictly_decreasing(series: &[Vec<f64>]) -> bool {
    series.windows(2).all(|w| significant_decrease(&w[0], &w[1]))
}
