//! The global quantile-comparison test.
//!
//! For J independent groups, bootstrap the pairwise differences between
//! Harrell–Davis quantile estimates, append the zero vector to the resulting
//! cloud, and turn the zero vector's projection depth into a generalized
//! p-value. Because the estimator spreads weight over all order statistics,
//! the procedure keeps working when the data are full of ties — the regime
//! where standard-error-based median tests fall apart.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{projection_distances, Cloud};
use crate::error::{Error, Result};
use crate::quantiles::{hd_weights, HdWeights, Quantile};
use crate::rng::{derive_seed2, stream, TAG_GROUP, TAG_QUANTILE, TAG_REPLICATE};

/// J independent samples. Groups are indexed in the order supplied; labels,
/// if any, live with the caller.
#[derive(Debug, Clone)]
pub struct GroupedData {
    groups: Vec<Vec<f64>>,
}

impl GroupedData {
    /// Validates that there are at least two groups, every group is
    /// nonempty, and every value is finite.
    pub fn new(groups: Vec<Vec<f64>>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::TooFewGroups(groups.len()));
        }
        for g in &groups {
            if g.is_empty() {
                return Err(Error::EmptySample);
            }
            for &v in g {
                if !v.is_finite() {
                    return Err(Error::NonFinite { value: v });
                }
            }
        }
        Ok(GroupedData { groups })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<f64>] {
        &self.groups
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }
}

/// The (B+1) x L matrix of bootstrap pairwise quantile differences, plus the
/// appended all-zero null row. Column order is fixed: pairs `(j, k)` with
/// `j < k` in lexicographic order.
#[derive(Debug, Clone)]
pub struct DeltaCloud {
    nboot: usize,
    pairs: Vec<(usize, usize)>,
    /// Row-major, `(nboot + 1) * pairs.len()` entries; the last row is zero.
    data: Vec<f64>,
}

impl DeltaCloud {
    /// Number of bootstrap rows (the matrix has one more, the null row).
    pub fn nboot(&self) -> usize {
        self.nboot
    }

    pub fn column_count(&self) -> usize {
        self.pairs.len()
    }

    /// The `(j, k)` group-index pair behind each column.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn row(&self, b: usize) -> &[f64] {
        let l = self.pairs.len();
        &self.data[b * l..(b + 1) * l]
    }

    /// Plain rectangular text form: one row per line, tab-separated, the
    /// all-zero null row last.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for b in 0..=self.nboot {
            let row = self.row(b);
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push('\t');
                }
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }

    fn to_cloud(&self) -> Result<Cloud> {
        Cloud::from_flat(self.nboot + 1, self.pairs.len(), self.data.clone())
    }
}

/// Everything the test reports for one target quantile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QTestResult {
    /// The target quantile.
    pub q: f64,
    /// Per-group quantile estimates on the original (non-bootstrap) data.
    pub estimates: Vec<f64>,
    /// Pairwise differences `estimates[j] - estimates[k]` in column order.
    pub deltas: Vec<f64>,
    /// The `(j, k)` pair behind each delta.
    pub pairs: Vec<(usize, usize)>,
    /// Depth-based generalized p-value.
    pub p_value: f64,
    /// Number of bootstrap replicates used.
    pub nboot: usize,
    /// Master seed, echoed for reproducibility (0 when per-group streams
    /// were supplied directly).
    pub seed: u64,
    /// Projection directions skipped while measuring depth; a high count
    /// signals heavy ties.
    pub skipped_directions: usize,
}

/// Lexicographic `(j, k)`, `j < k`, column order of the delta matrix.
pub(crate) fn pair_columns(group_count: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(group_count * (group_count - 1) / 2);
    for j in 0..group_count {
        for k in (j + 1)..group_count {
            pairs.push((j, k));
        }
    }
    pairs
}

/// Per-group resampling seeds derived from a master seed. The bootstrap
/// stream of group `j` is a pure function of `group_seeds[j]`, so callers
/// can permute groups and seeds together to keep each group's resamples.
pub fn group_seeds(seed: u64, group_count: usize) -> Vec<u64> {
    (0..group_count)
        .map(|j| derive_seed2(seed, TAG_GROUP, j as u64))
        .collect()
}

/// Bootstrap the pairwise quantile differences into a [`DeltaCloud`].
///
/// Each replicate resamples every group with replacement, re-estimates the
/// target quantile, and stores all pairwise differences as one row. The
/// output is deterministic for fixed inputs and seed, regardless of how the
/// replicates are scheduled across threads.
pub fn bootstrap_deltas(
    data: &GroupedData,
    q: Quantile,
    nboot: usize,
    seed: u64,
) -> Result<DeltaCloud> {
    bootstrap_deltas_with_group_seeds(data, q, nboot, &group_seeds(seed, data.group_count()))
}

/// As [`bootstrap_deltas`], but with one explicit resampling seed per group.
pub fn bootstrap_deltas_with_group_seeds(
    data: &GroupedData,
    q: Quantile,
    nboot: usize,
    group_seeds: &[u64],
) -> Result<DeltaCloud> {
    if nboot == 0 {
        return Err(Error::InvalidParameter(
            "need at least one bootstrap replicate".into(),
        ));
    }
    let j_count = data.group_count();
    if group_seeds.len() != j_count {
        return Err(Error::InvalidParameter(format!(
            "got {} group seeds for {} groups",
            group_seeds.len(),
            j_count
        )));
    }
    for g in data.groups() {
        if g.len() < 2 {
            return Err(Error::SampleTooSmall {
                n: g.len(),
                reason: "resampling a single observation cannot vary",
            });
        }
    }

    let weights: Vec<HdWeights> = data
        .groups()
        .iter()
        .map(|g| hd_weights(g.len(), q))
        .collect::<Result<_>>()?;

    let pairs = pair_columns(j_count);
    let l = pairs.len();
    let mut rows = vec![0.0; (nboot + 1) * l];

    rows[..nboot * l]
        .par_chunks_mut(l)
        .enumerate()
        .for_each(|(rep, row)| {
            let mut thetas = vec![0.0; j_count];
            let mut buf: Vec<f64> = Vec::new();
            for jj in 0..j_count {
                let group = &data.groups()[jj];
                let n = group.len();
                let mut rng = stream(derive_seed2(group_seeds[jj], TAG_REPLICATE, rep as u64));
                buf.clear();
                buf.extend((0..n).map(|_| group[rng.random_range(0..n)]));
                buf.sort_unstable_by(f64::total_cmp);
                thetas[jj] = weights[jj].estimate_sorted(&buf);
            }
            for (c, &(jj, kk)) in pairs.iter().enumerate() {
                row[c] = thetas[jj] - thetas[kk];
            }
        });

    Ok(DeltaCloud {
        nboot,
        pairs,
        data: rows,
    })
}

/// Run the full test: bootstrap the delta cloud, measure every row's
/// projection distance, and rank the null row.
pub fn qanova(data: &GroupedData, q: Quantile, nboot: usize, seed: u64) -> Result<QTestResult> {
    let seeds = group_seeds(seed, data.group_count());
    let mut result = qanova_with_group_seeds(data, q, nboot, &seeds)?;
    result.seed = seed;
    Ok(result)
}

/// As [`qanova`], with explicit per-group resampling seeds.
pub fn qanova_with_group_seeds(
    data: &GroupedData,
    q: Quantile,
    nboot: usize,
    group_seeds: &[u64],
) -> Result<QTestResult> {
    let cloud = bootstrap_deltas_with_group_seeds(data, q, nboot, group_seeds)?;
    let report = projection_distances(&cloud.to_cloud()?)?;

    let null_distance = report.distances[nboot];
    let p_value = crate::depth::depth_pvalue(&report.distances[..nboot], null_distance);

    let estimates: Vec<f64> = data
        .groups()
        .iter()
        .map(|g| crate::quantiles::hd_estimate(g, q))
        .collect::<Result<_>>()?;
    let deltas: Vec<f64> = cloud
        .pairs()
        .iter()
        .map(|&(j, k)| estimates[j] - estimates[k])
        .collect();

    Ok(QTestResult {
        q: q.value(),
        estimates,
        deltas,
        pairs: cloud.pairs().to_vec(),
        p_value,
        nboot,
        seed: 0,
        skipped_directions: report.skipped_directions,
    })
}

/// Run the test at several quantiles.
///
/// Each quantile is an independent invocation with its own derived seed, so
/// resampling indices are not shared across quantiles. No multiplicity
/// adjustment is applied to the p-values.
pub fn qanova_multi(
    data: &GroupedData,
    qs: &[Quantile],
    nboot: usize,
    seed: u64,
) -> Result<Vec<QTestResult>> {
    if qs.is_empty() {
        return Err(Error::InvalidParameter("empty quantile list".into()));
    }
    for (i, a) in qs.iter().enumerate() {
        for b in &qs[i + 1..] {
            if a.value() == b.value() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate quantile {}",
                    a.value()
                )));
            }
        }
    }
    qs.iter()
        .enumerate()
        .map(|(i, &q)| qanova(data, q, nboot, derive_seed2(seed, TAG_QUANTILE, i as u64)))
        .collect()
}
