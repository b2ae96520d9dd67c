//! Source distributions for the simulation study: g-and-h transforms of a
//! standard normal, the beta-binomial family, and tail-modified
//! beta-binomial variants whose lower tails (and hence central quantiles)
//! agree with the unmodified distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::open_unit;
use crate::special::{ln_beta, standard_normal_quantile};

/// Parameters of the g-and-h family: `g` controls skewness, `h` tail
/// heaviness; `(0, 0)` is the standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhParams {
    pub g: f64,
    pub h: f64,
}

impl GhParams {
    pub fn new(g: f64, h: f64) -> Result<Self> {
        if !g.is_finite() || !h.is_finite() || g < 0.0 || h < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "g-and-h parameters must be finite and nonnegative, got g={g}, h={h}"
            )));
        }
        Ok(GhParams { g, h })
    }
}

/// The g-and-h transform of a standard normal deviate.
///
/// `((exp(gz) - 1)/g) * exp(h z^2 / 2)` for `g > 0`, with the limiting form
/// `z * exp(h z^2 / 2)` at `g = 0`. Strictly increasing in `z` for the
/// nonnegative parameter range, so population quantiles of the output are
/// the transform of normal quantiles; in particular the median is 0 for
/// every `(g, h)`.
pub fn gh_transform(z: f64, p: GhParams) -> f64 {
    let tail = (p.h * z * z / 2.0).exp();
    if p.g > 0.0 {
        ((p.g * z).exp_m1() / p.g) * tail
    } else {
        z * tail
    }
}

/// Draw `n` independent g-and-h variates: exact inverse-CDF standard
/// normals pushed through [`gh_transform`].
pub fn sample_gh<R: Rng>(n: usize, p: GhParams, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| gh_transform(standard_normal_quantile(open_unit(rng)), p))
        .collect()
}

/// Beta-binomial parameters: support `0..=m`, shape `r, s > 0`. The sample
/// space has `m + 1` points, so samples with `n > m + 1` observations are
/// guaranteed to contain ties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBinParams {
    pub m: u32,
    pub r: f64,
    pub s: f64,
}

impl BetaBinParams {
    pub fn new(m: u32, r: f64, s: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("beta-binomial needs m >= 1".into()));
        }
        if !(r > 0.0) || !(s > 0.0) || !r.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta-binomial shapes must be positive, got r={r}, s={s}"
            )));
        }
        Ok(BetaBinParams { m, r, s })
    }
}

/// A probability mass function on the integer support `0..=m`.
#[derive(Debug, Clone)]
pub struct DiscretePmf {
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl DiscretePmf {
    /// Build from raw masses over `0..=m`. Masses must be nonnegative and
    /// sum to 1 within 1e-9; the sum is then normalized away exactly.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty pmf".into()));
        }
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!("bad pmf mass {p}")));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightSum { sum });
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p / sum).collect();
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cum.push(acc);
        }
        // Pin the top of the CDF so inverse-CDF draws can never fall off.
        *cum.last_mut().unwrap() = 1.0;
        Ok(DiscretePmf { probs, cum })
    }

    /// Largest support point `m`.
    pub fn max_value(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(X <= x)`, with `x` clamped to the support's top.
    pub fn cdf(&self, x: usize) -> f64 {
        self.cum[x.min(self.cum.len() - 1)]
    }
}

/// Beta-binomial pmf on `0..=m`:
/// `P(x) = C(m, x) B(x + r, m - x + s) / B(r, s)`,
/// computed in log space with the binomial coefficient written through the
/// beta function, `1 / ((m + 1) B(m - x + 1, x + 1))`.
///
/// `r < s` puts the bulk of the mass at small `x` (right-skewed), `r = s`
/// is symmetric.
pub fn beta_binomial_pmf(p: BetaBinParams) -> Result<DiscretePmf> {
    let m = p.m as f64;
    let ln_norm = (m + 1.0).ln();
    let ln_b_rs = ln_beta(p.r, p.s)?;
    let mut probs = Vec::with_capacity(p.m as usize + 1);
    for x in 0..=p.m {
        let x = x as f64;
        let ln_choose = -ln_norm - ln_beta(m - x + 1.0, x + 1.0)?;
        probs.push((ln_choose + ln_beta(x + p.r, m - x + p.s)? - ln_b_rs).exp());
    }
    DiscretePmf::from_probs(probs)
}

/// Smallest support point `x` with `CDF(x) >= prob`, for `0 < prob < 1`.
pub fn discrete_quantile(pmf: &DiscretePmf, prob: f64) -> Result<usize> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie strictly between 0 and 1, got {prob}"
        )));
    }
    Ok(pmf.cum.partition_point(|&c| c < prob))
}

/// Draw `n` i.i.d. values by inverse-CDF sampling; returned as `f64` so they
/// slot straight into the estimators.
pub fn sample_discrete<R: Rng>(pmf: &DiscretePmf, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u = open_unit(rng);
            pmf.cum.partition_point(|&c| c < u) as f64
        })
        .collect()
}

/// How to rearrange the upper-tail mass of a beta-binomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVariant {
    /// Spread the total mass above the cut evenly over those atoms.
    Flattened,
    /// Reverse the order of the atom masses above the cut.
    Reversed,
}

/// A beta-binomial with its upper tail rearranged from `cut` upward.
///
/// Both variants preserve total mass, and the CDF strictly below `cut` is
/// untouched — so any quantile that the base distribution attains below the
/// cut (the median, in the simulation designs) is unchanged even though the
/// distributions themselves differ.
pub fn tail_modified_pmf(
    base: BetaBinParams,
    variant: TailVariant,
    cut: u32,
) -> Result<DiscretePmf> {
    if cut == 0 || cut > base.m {
        return Err(Error::InvalidParameter(format!(
            "tail cut must satisfy 0 < cut <= m, got cut={cut}, m={}",
            base.m
        )));
    }
    let pmf = beta_binomial_pmf(base)?;
    let mut probs = pmf.probs().to_vec();
    let cut = cut as usize;
    match variant {
        TailVariant::Flattened => {
            let tail: f64 = probs[cut..].iter().sum();
            let atoms = probs.len() - cut;
            for p in &mut probs[cut..] {
                *p = tail / atoms as f64;
            }
        }
        TailVariant::Reversed => probs[cut..].reverse(),
    }
    DiscretePmf::from_probs(probs)
}

/// A simulation source, as named in grid config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    GAndH {
        g: f64,
        h: f64,
    },
    BetaBinomial {
        m: u32,
        r: f64,
        s: f64,
    },
    TailModified {
        m: u32,
        r: f64,
        s: f64,
        variant: TailVariant,
        cut: u32,
    },
}

impl DistributionSpec {
    /// Validate parameters and precompute whatever sampling needs.
    pub fn prepare(&self) -> Result<PreparedSource> {
        match *self {
            DistributionSpec::GAndH { g, h } => Ok(PreparedSource::Gh(GhParams::new(g, h)?)),
            DistributionSpec::BetaBinomial { m, r, s } => Ok(PreparedSource::Discrete(
                beta_binomial_pmf(BetaBinParams::new(m, r, s)?)?,
            )),
            DistributionSpec::TailModified {
                m,
                r,
                s,
                variant,
                cut,
            } => Ok(PreparedSource::Discrete(tail_modified_pmf(
                BetaBinParams::new(m, r, s)?,
                variant,
                cut,
            )?)),
        }
    }

    /// Short human-readable form for result tables.
    pub fn summary(&self) -> String {
        match self {
            DistributionSpec::GAndH { g, h } => format!("g-and-h(g={g},h={h})"),
            DistributionSpec::BetaBinomial { m, r, s } => {
                format!("beta-binomial(m={m},r={r},s={s})")
            }
            DistributionSpec::TailModified {
                m,
                r,
                s,
                variant,
                cut,
            } => {
                let v = match variant {
                    TailVariant::Flattened => "flattened",
                    TailVariant::Reversed => "reversed",
                };
                format!("tail-modified(m={m},r={r},s={s},{v}@{cut})")
            }
        }
    }
}

/// A source that is ready to draw samples.
#[derive(Debug, Clone)]
pub enum PreparedSource {
    Gh(GhParams),
    Discrete(DiscretePmf),
}

impl PreparedSource {
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match self {
            PreparedSource::Gh(p) => sample_gh(n, *p, rng),
            PreparedSource::Discrete(pmf) => sample_discrete(pmf, n, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn gh_identity_and_origin() {
        let id = GhParams::new(0.0, 0.0).unwrap();
        for &z in &[-3.0, -0.5, 0.0, 1.7, 4.0] {
            assert_eq!(gh_transform(z, id), z);
        }
        for &(g, h) in &[(0.2, 0.0), (0.0, 0.2), (0.2, 0.2)] {
            assert_eq!(gh_transform(0.0, GhParams::new(g, h).unwrap()), 0.0);
        }
    }

    #[test]
    fn gh_reference_value() {
        let p = GhParams::new(0.2, 0.0).unwrap();
        assert!((gh_transform(1.0, p) - 1.107_013_790_800_849_5).abs() < 1e-12);
    }

    #[test]
    fn gh_strictly_increasing() {
        for &(g, h) in &[(0.0, 0.0), (0.0, 0.2), (0.2, 0.0), (0.2, 0.2)] {
            let p = GhParams::new(g, h).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=800 {
                let z = -4.0 + i as f64 * 0.01;
                let w = gh_transform(z, p);
                assert!(w > prev, "not increasing at z={z} for (g,h)=({g},{h})");
                prev = w;
            }
        }
    }

    #[test]
    fn gh_params_validation() {
        assert!(GhParams::new(-0.1, 0.0).is_err());
        assert!(GhParams::new(0.0, -0.1).is_err());
        assert!(GhParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn gh_sampling_deterministic() {
        let p = GhParams::new(0.2, 0.2).unwrap();
        let a = sample_gh(64, p, &mut stream(5));
        let b = sample_gh(64, p, &mut stream(5));
        assert_eq!(a, b);
        let c = sample_gh(64, p, &mut stream(6));
        assert_ne!(a, c);
    }

    #[test]
    fn standard_normal_sample_moments() {
        let p = GhParams::new(0.0, 0.0).unwrap();
        let n = 200_000;
        let x = sample_gh(n, p, &mut stream(11));
        let mean: f64 = x.iter().sum::<f64>() / n as f64;
        let var: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let bound = 4.0 / (n as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean}");
        assert!((var - 1.0).abs() < 4.0 * bound, "var {var}");
    }

    #[test]
    fn beta_binomial_mass_sums_to_one() {
        for &(m, r, s) in &[(10, 1.0, 9.0), (20, 3.0, 3.0), (30, 1.0, 3.0), (5, 0.4, 0.7)] {
            let pmf = beta_binomial_pmf(BetaBinParams::new(m, r, s).unwrap()).unwrap();
            let sum: f64 = pmf.probs().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert_eq!(pmf.max_value(), m as usize);
        }
    }

    #[test]
    fn right_skewed_pmf_is_monotone_decreasing() {
        let pmf = beta_binomial_pmf(BetaBinParams::new(30, 1.0, 3.0).unwrap()).unwrap();
        let p = pmf.probs();
        for x in 1..p.len() {
            assert!(p[x] < p[x - 1], "pmf not decreasing at x={x}");
        }
        // The CDF crosses 0.52 between 5 and 6.
        assert!(pmf.cdf(5) < 0.52);
        assert!(pmf.cdf(6) >= 0.52);
    }

    #[test]
    fn symmetric_pmf_mirrors() {
        let pmf = beta_binomial_pmf(BetaBinParams::new(20, 3.0, 3.0).unwrap()).unwrap();
        let p = pmf.probs();
        for x in 0..=20 {
            assert!((p[x] - p[20 - x]).abs() < 1e-12);
        }
    }

    #[test]
    fn skewed_low_mass_at_zero() {
        // (m=10, r=1, s=9): P(0) = 9/19, so zero is already past the .47
        // point of the distribution.
        let pmf = beta_binomial_pmf(BetaBinParams::new(10, 1.0, 9.0).unwrap()).unwrap();
        assert!((pmf.probs()[0] - 9.0 / 19.0).abs() < 1e-12);
        assert_eq!(discrete_quantile(&pmf, 0.47).unwrap(), 0);
    }

    #[test]
    fn quantile_basics() {
        let pmf = beta_binomial_pmf(BetaBinParams::new(20, 3.0, 3.0).unwrap()).unwrap();
        // below the first atom's mass
        assert_eq!(discrete_quantile(&pmf, 1e-4).unwrap(), 0);
        assert!(discrete_quantile(&pmf, 0.0).is_err());
        assert!(discrete_quantile(&pmf, 1.0).is_err());
        // symmetric: the .5 point sits just below the middle
        let x = discrete_quantile(&pmf, 0.5).unwrap();
        assert!(x <= 10 && 10 <= x + 1);
    }

    #[test]
    fn quantile_of_wider_symmetric_support() {
        // Support 0..=21: the CDF at 10 is exactly 1/2, so the .54 point is 11.
        let pmf = beta_binomial_pmf(BetaBinParams::new(21, 3.0, 3.0).unwrap()).unwrap();
        assert!((pmf.cdf(10) - 0.5).abs() < 1e-12);
        assert_eq!(discrete_quantile(&pmf, 0.54).unwrap(), 11);
        // Support 0..=20 crosses .54 already at 10.
        let pmf20 = beta_binomial_pmf(BetaBinParams::new(20, 3.0, 3.0).unwrap()).unwrap();
        assert_eq!(discrete_quantile(&pmf20, 0.54).unwrap(), 10);
    }

    #[test]
    fn quantile_cdf_consistency() {
        for &(m, r, s) in &[(10, 1.0, 9.0), (21, 3.0, 3.0), (30, 1.0, 3.0)] {
            let pmf = beta_binomial_pmf(BetaBinParams::new(m, r, s).unwrap()).unwrap();
            for x in 0..=pmf.max_value() {
                let c = pmf.cdf(x);
                if c > 0.0 && c < 1.0 {
                    assert!(discrete_quantile(&pmf, c).unwrap() <= x);
                }
            }
        }
    }

    #[test]
    fn discrete_sampling_matches_cdf() {
        let pmf = beta_binomial_pmf(BetaBinParams::new(10, 1.0, 9.0).unwrap()).unwrap();
        let n = 100_000;
        let draws = sample_discrete(&pmf, n, &mut stream(21));
        for x in 0..=10usize {
            let freq = draws.iter().filter(|&&v| v <= x as f64).count() as f64 / n as f64;
            assert!(
                (freq - pmf.cdf(x)).abs() < 0.01,
                "empirical CDF off at {x}: {freq} vs {}",
                pmf.cdf(x)
            );
        }
    }

    #[test]
    fn degenerate_pmf_draws_constant() {
        let mut probs = vec![0.0; 8];
        probs[3] = 1.0;
        let pmf = DiscretePmf::from_probs(probs).unwrap();
        let draws = sample_discrete(&pmf, 50, &mut stream(4));
        assert!(draws.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn small_support_forces_ties() {
        let pmf = beta_binomial_pmf(BetaBinParams::new(10, 1.0, 3.0).unwrap()).unwrap();
        let draws = sample_discrete(&pmf, 50, &mut stream(9));
        let mut seen = draws.clone();
        seen.sort_unstable_by(f64::total_cmp);
        seen.dedup();
        assert!(seen.len() <= 11);
    }

    #[test]
    fn tail_modification_preserves_lower_cdf() {
        let base = BetaBinParams::new(21, 3.0, 3.0).unwrap();
        let base_pmf = beta_binomial_pmf(base).unwrap();
        for variant in [TailVariant::Flattened, TailVariant::Reversed] {
            let modified = tail_modified_pmf(base, variant, 15).unwrap();
            let sum: f64 = modified.probs().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for x in 0..15usize {
                assert!(
                    (modified.cdf(x) - base_pmf.cdf(x)).abs() < 1e-12,
                    "CDF changed below the cut at x={x} ({variant:?})"
                );
            }
            // The tail genuinely differs for this base.
            assert!(
                (modified.probs()[15] - base_pmf.probs()[15]).abs() > 1e-6,
                "{variant:?} left the tail untouched"
            );
        }
    }

    #[test]
    fn tail_modification_edge_cases() {
        let base = BetaBinParams::new(20, 3.0, 3.0).unwrap();
        // Cutting at the top atom is the identity for both variants.
        let base_pmf = beta_binomial_pmf(base).unwrap();
        for variant in [TailVariant::Flattened, TailVariant::Reversed] {
            let modified = tail_modified_pmf(base, variant, 20).unwrap();
            for x in 0..=20usize {
                assert!((modified.probs()[x] - base_pmf.probs()[x]).abs() < 1e-15);
            }
        }
        assert!(tail_modified_pmf(base, TailVariant::Flattened, 0).is_err());
        assert!(tail_modified_pmf(base, TailVariant::Flattened, 21).is_err());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = DistributionSpec::TailModified {
            m: 21,
            r: 3.0,
            s: 3.0,
            variant: TailVariant::Flattened,
            cut: 15,
        };
        let text = toml::to_string(&spec).unwrap();
        let back: DistributionSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
