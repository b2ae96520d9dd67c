//! Quantile estimators: the usual sample median, the Harrell–Davis
//! estimator, and the ideal-fourths quartiles.
//!
//! The Harrell–Davis estimate of the `q`th quantile is a weighted average of
//! every order statistic, with weights given by increments of a
//! Beta((n+1)q, (n+1)(1-q)) CDF over the lattice `i/n`. Because every
//! observation contributes, the estimator's sampling distribution stays
//! effectively continuous even when the data are heavily tied — which is the
//! property the bootstrap test in [`crate::qtest`] relies on.

use crate::error::{Error, Result};
use crate::special::reg_inc_beta;

/// A target quantile, strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantile(f64);

impl Quantile {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 || q >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "quantile must lie strictly between 0 and 1, got {q}"
            )));
        }
        Ok(Quantile(q))
    }

    /// The lower quartile.
    pub const Q25: Quantile = Quantile(0.25);
    /// The median.
    pub const MEDIAN: Quantile = Quantile(0.5);
    /// The upper quartile.
    pub const Q75: Quantile = Quantile(0.75);

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    for &v in x {
        if !v.is_finite() {
            return Err(Error::NonFinite { value: v });
        }
    }
    Ok(())
}

fn sorted_copy(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// The usual sample median: the middle order statistic for odd `n`, the
/// average of the two middle order statistics for even `n`.
pub fn sample_median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    check_finite(x)?;
    Ok(median_sorted(&sorted_copy(x)))
}

/// Median of an already-sorted slice. Callers guarantee `sorted` is
/// nonempty and ascending.
pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Harrell–Davis weights for sample size `n` and target quantile `q`.
///
/// Weight `i` (1-based) is `I_{i/n}(a, b) - I_{(i-1)/n}(a, b)` with
/// `a = (n+1)q`, `b = (n+1)(1-q)`. The weights are renormalized to sum to
/// exactly 1; a raw sum further than 1e-9 from 1 is reported as an error
/// rather than silently patched.
#[derive(Debug, Clone)]
pub struct HdWeights {
    n: usize,
    q: Quantile,
    w: Vec<f64>,
}

impl HdWeights {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> Quantile {
        self.q
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Weighted sum over an already-sorted sample of length `n`.
    ///
    /// This is the bootstrap hot path: resample, sort, dot with cached
    /// weights. Panics if the length does not match.
    pub fn estimate_sorted(&self, sorted: &[f64]) -> f64 {
        assert_eq!(
            sorted.len(),
            self.n,
            "sample length does not match the weights"
        );
        let mut acc = 0.0;
        for (wi, xi) in self.w.iter().zip(sorted) {
            acc += wi * xi;
        }
        acc
    }
}

/// Compute the Harrell–Davis weight vector for `(n, q)`.
///
/// The vector is a first-class value so callers that evaluate the same
/// `(n, q)` pair hundreds of times (the bootstrap does) can compute it once.
pub fn hd_weights(n: usize, q: Quantile) -> Result<HdWeights> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let a = (n as f64 + 1.0) * q.value();
    let b = (n as f64 + 1.0) * (1.0 - q.value());
    let mut w = Vec::with_capacity(n);
    let mut prev = 0.0;
    for i in 1..=n {
        let cdf = if i == n {
            1.0
        } else {
            reg_inc_beta(i as f64 / n as f64, a, b)?
        };
        w.push(cdf - prev);
        prev = cdf;
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightSum { sum });
    }
    for wi in &mut w {
        *wi /= sum;
    }
    Ok(HdWeights { n, q, w })
}

/// Harrell–Davis estimate of the `q`th quantile of `x`.
///
/// The input is never mutated; sorting happens on a copy. The estimate is a
/// convex combination of the order statistics, so it always lies within
/// `[min(x), max(x)]`.
pub fn hd_estimate(x: &[f64], q: Quantile) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    check_finite(x)?;
    let weights = hd_weights(x.len(), q)?;
    Ok(weights.estimate_sorted(&sorted_copy(x)))
}

/// Ideal-fourths estimates of the lower and upper quartiles.
///
/// With `j = floor(n/4 + 5/12)` and `h` the fractional remainder, the lower
/// quartile interpolates the `j`th and `(j+1)`th order statistics and the
/// upper quartile mirrors it from the top. Needs `n >= 3`: for smaller `n`
/// the formula indexes below the first order statistic.
pub fn ideal_fourths(x: &[f64]) -> Result<(f64, f64)> {
    check_finite(x)?;
    let sorted = sorted_copy(x);
    ideal_fourths_sorted(&sorted).ok_or(Error::SampleTooSmall {
        n: x.len(),
        reason: "ideal fourths interpolate adjacent order statistics and need n >= 3",
    })
}

/// Ideal fourths of an already-sorted slice; `None` when `n < 3`.
pub(crate) fn ideal_fourths_sorted(sorted: &[f64]) -> Option<(f64, f64)> {
    let n = sorted.len();
    let f = n as f64 / 4.0 + 5.0 / 12.0;
    let j = f.floor() as usize;
    if j < 1 || j >= n {
        return None;
    }
    let h = f - j as f64;
    // 1-based indices in the formulas; slice access is 0-based.
    let q1 = (1.0 - h) * sorted[j - 1] + h * sorted[j];
    let k = n - j + 1;
    let q2 = (1.0 - h) * sorted[k - 1] + h * sorted[k - 2];
    Some((q1, q2))
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-50.0_f64..50.0, 1..40)
    }

    proptest! {
        #[test]
        fn location_scale_equivariance(
            x in sample_strategy(),
            a in 0.1_f64..5.0,
            b in -20.0_f64..20.0,
            qi in 1_usize..20,
        ) {
            let q = Quantile::new(qi as f64 / 20.0).unwrap();
            let base = hd_estimate(&x, q).unwrap();
            let moved: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let got = hd_estimate(&moved, q).unwrap();
            let want = a * base + b;
            prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
        }

        #[test]
        fn perturbing_one_datum_moves_estimate_at_most_that_much(
            x in sample_strategy(),
            idx in any::<proptest::sample::Index>(),
            eps in -0.5_f64..0.5,
        ) {
            let q = Quantile::new(0.5).unwrap();
            let base = hd_estimate(&x, q).unwrap();
            let mut y = x.clone();
            let i = idx.index(y.len());
            y[i] += eps;
            let moved = hd_estimate(&y, q).unwrap();
            prop_assert!((moved - base).abs() <= eps.abs() + 1e-12);
        }

        #[test]
        fn fourths_bracket_median_prop(x in proptest::collection::vec(-50.0_f64..50.0, 4..60)) {
            let (q1, q2) = ideal_fourths(&x).unwrap();
            let m = sample_median(&x).unwrap();
            prop_assert!(q1 <= m + 1e-12);
            prop_assert!(m <= q2 + 1e-12);
        }
    }
}
