//! Log-gamma, log-beta, and the regularized incomplete beta function.
//!
//! These are the numeric kernels behind the Harrell–Davis weights, the
//! beta-binomial pmf, and the Clopper–Pearson interval. Everything is
//! evaluated in log space so that ratios of beta functions stay finite for
//! large arguments.

use crate::error::{Error, Result};

/// Continued-fraction convergence tolerance.
const CF_EPS: f64 = 1e-14;
/// Iteration budget for the continued fraction; exhaustion is an error.
const CF_MAX_ITER: usize = 300;
/// Guard against division by values indistinguishable from zero.
const CF_TINY: f64 = 1e-300;

/// Lanczos coefficients with g = 607/128 (Godfrey's 15-term set).
const LANCZOS_COEF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    3.399_464_998_481_188_87e-5,
    4.652_362_892_704_857_56e-5,
    -9.837_447_530_487_956_46e-5,
    1.580_887_032_249_124_94e-4,
    -2.102_644_417_241_048_83e-4,
    2.174_396_181_152_126_43e-4,
    -1.643_181_065_367_638_9e-4,
    8.441_822_398_385_274_33e-5,
    -2.619_083_840_158_140_87e-5,
    3.689_918_265_953_162_34e-6,
];

/// Natural log of the gamma function for `x > 0`.
///
/// Lanczos approximation; relative error is well below 1e-12 across
/// `[0.5, 1e6]`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { value: x });
    }
    if x <= 0.0 {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    let tmp = x + 5.242_187_5; // x + g + 1/2
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut series = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS_COEF {
        y += 1.0;
        series += c / y;
    }
    Ok(tmp + (2.506_628_274_631_000_5 * series / x).ln())
}

/// Natural log of the complete beta function `B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "ln_beta requires positive arguments, got a={a}, b={b}"
        )));
    }
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// Regularized incomplete beta function `I_x(a, b)`, i.e. the CDF at `x` of
/// a Beta(a, b) random variable.
///
/// Uses the continued-fraction expansion, switching to the complementary
/// form at `x > (a+1)/(a+b+2)` so the fraction converges quickly on both
/// sides. Absolute error is below 1e-12 over the parameter ranges the
/// estimators produce.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { value: x });
    }
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "reg_inc_beta requires positive shape parameters, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "reg_inc_beta requires 0 <= x <= 1, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }

    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)?;
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - x, b, a)? / b)
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() <= CF_EPS {
            return Ok(h);
        }
    }

    Err(Error::NoConvergence {
        x,
        a,
        b,
        max_iter: CF_MAX_ITER,
    })
}

/// Inverse of [`reg_inc_beta`] in `x`: the Beta(a, b) quantile function.
///
/// Bisection on the monotone CDF; converges to about 1e-15 in `x`, which is
/// far tighter than the confidence-interval use case needs.
pub fn reg_inc_beta_inv(p: f64, a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "reg_inc_beta_inv requires positive shape parameters, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "reg_inc_beta_inv requires 0 <= p <= 1, got {p}"
        )));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reg_inc_beta(mid, a, b)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Quantile function of the standard normal distribution.
///
/// Wichura's AS 241 (PPND16) rational approximations, accurate to roughly
/// 1e-15 in absolute terms — comfortably below the 1e-9 the samplers need.
/// Returns `-inf`/`+inf` at `p = 0`/`p = 1` and NaN outside `[0, 1]`.
pub fn standard_normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_854_6e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }

    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r)
            + 1.0;
        num / den
    } else {
        let r = r - 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r)
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn complement_identity_holds(
            x in 0.0_f64..1.0,
            a in 0.2_f64..120.0,
            b in 0.2_f64..120.0,
        ) {
            let lhs = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
            prop_assert!((lhs - 1.0).abs() < 1e-10);
        }

        #[test]
        fn cdf_monotone(
            x1 in 0.0_f64..1.0,
            x2 in 0.0_f64..1.0,
            a in 0.2_f64..120.0,
            b in 0.2_f64..120.0,
        ) {
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            let vlo = reg_inc_beta(lo, a, b).unwrap();
            let vhi = reg_inc_beta(hi, a, b).unwrap();
            prop_assert!(vlo <= vhi + 1e-14);
        }
    }
}
