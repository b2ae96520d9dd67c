//! Projection distances of points relative to a multivariate cloud, and the
//! depth-based generalized p-value.
//!
//! The outlyingness of a point is its largest scaled projection onto the
//! directions defined by the cloud's own rows: center the cloud at the
//! marginal medians, project every row onto the direction through each
//! centered row, and scale each direction's projections by their
//! ideal-fourths interquartile range. A point at the center has distance 0;
//! the null vector of the bootstrap test is judged by how its distance ranks
//! within the cloud's own distances.

use crate::error::{Error, Result};
use crate::quantiles::{ideal_fourths_sorted, median_sorted};

/// A rectangular cloud of `n >= 2` points in `p >= 1` dimensions,
/// stored row-major.
#[derive(Debug, Clone)]
pub struct Cloud {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Cloud {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::SampleTooSmall {
                n,
                reason: "a cloud needs at least 2 rows",
            });
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::InvalidParameter("cloud rows must be nonempty".into()));
        }
        let mut data = Vec::with_capacity(n * p);
        for row in &rows {
            if row.len() != p {
                return Err(Error::InvalidParameter(format!(
                    "ragged cloud: expected {p} coordinates, found {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(n, p, data)
    }

    /// Build from a row-major buffer of length `n * p`.
    pub fn from_flat(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::SampleTooSmall {
                n,
                reason: "a cloud needs at least 2 rows",
            });
        }
        if p == 0 || data.len() != n * p {
            return Err(Error::InvalidParameter(format!(
                "flat cloud buffer has length {}, expected {n} x {p}",
                data.len()
            )));
        }
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFinite { value: v });
            }
        }
        Ok(Cloud { n, p, data })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }
}

/// Projection distances for every row of a cloud, plus the center they were
/// measured from and how many candidate directions were skipped.
#[derive(Debug, Clone)]
pub struct DepthReport {
    pub center: Vec<f64>,
    pub distances: Vec<f64>,
    pub skipped_directions: usize,
}

/// Coordinate-wise sample medians of the cloud's rows.
pub fn marginal_medians(cloud: &Cloud) -> Vec<f64> {
    let mut center = Vec::with_capacity(cloud.p);
    let mut column = vec![0.0; cloud.n];
    for k in 0..cloud.p {
        for i in 0..cloud.n {
            column[i] = cloud.data[i * cloud.p + k];
        }
        column.sort_unstable_by(f64::total_cmp);
        center.push(median_sorted(&column));
    }
    center
}

/// Projection distance of every row relative to the whole cloud.
///
/// For each centered row `U_i` with positive squared norm `C_i`, row `j`
/// projects to length `|U_i . U_j| / sqrt(C_i)`; those lengths are scaled by
/// the ideal-fourths spread of the direction's own projections, and the
/// distance of row `j` is the maximum scaled projection over directions.
///
/// Directions are skipped when the row coincides with the center (`C_i = 0`,
/// no direction defined) or when the ideal-fourths spread of its projections
/// is zero (possible under heavy ties). If every direction is skipped the
/// cloud is degenerate and an error is returned.
pub fn projection_distances(cloud: &Cloud) -> Result<DepthReport> {
    let n = cloud.n;
    let p = cloud.p;
    let center = marginal_medians(cloud);

    // Centered rows.
    let mut u = cloud.data.clone();
    for i in 0..n {
        for k in 0..p {
            u[i * p + k] -= center[k];
        }
    }
    let sq_norm: Vec<f64> = (0..n)
        .map(|i| u[i * p..(i + 1) * p].iter().map(|v| v * v).sum())
        .collect();

    let mut distances = vec![0.0; n];
    let mut projected = vec![0.0; n];
    let mut sorted = vec![0.0; n];
    let mut skipped = 0usize;
    let mut admissible = false;

    for i in 0..n {
        if sq_norm[i] == 0.0 {
            skipped += 1;
            continue;
        }
        let ui = &u[i * p..(i + 1) * p];
        let inv_norm = 1.0 / sq_norm[i].sqrt();
        for j in 0..n {
            let uj = &u[j * p..(j + 1) * p];
            let mut dot = 0.0;
            for k in 0..p {
                dot += ui[k] * uj[k];
            }
            projected[j] = dot.abs() * inv_norm;
        }
        sorted.copy_from_slice(&projected);
        sorted.sort_unstable_by(f64::total_cmp);
        let spread = match ideal_fourths_sorted(&sorted) {
            Some((q1, q2)) => q2 - q1,
            None => {
                skipped += 1;
                continue;
            }
        };
        if spread <= 0.0 {
            skipped += 1;
            continue;
        }
        admissible = true;
        for j in 0..n {
            let d = projected[j] / spread;
            if d > distances[j] {
                distances[j] = d;
            }
        }
    }

    if !admissible {
        return Err(Error::DegenerateCloud);
    }
    Ok(DepthReport {
        center,
        distances,
        skipped_directions: skipped,
    })
}

/// Generalized p-value from projection distances: the fraction of cloud
/// rows whose distance the null point fails to reach,
/// `1 - (1/B) * #{b : K_0 >= K_b}`.
///
/// Nonincreasing in `null_distance`; 0 when the null point is at least as
/// far out as every cloud row, 1 when it is deeper than all of them.
pub fn depth_pvalue(cloud_distances: &[f64], null_distance: f64) -> f64 {
    assert!(
        !cloud_distances.is_empty(),
        "depth_pvalue needs at least one cloud distance"
    );
    let b = cloud_distances.len() as f64;
    let count = cloud_distances
        .iter()
        .filter(|&&k| null_distance >= k)
        .count() as f64;
    1.0 - count / b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rows: &[&[f64]]) -> Cloud {
        Cloud::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn cloud_validation() {
        assert!(Cloud::new(vec![vec![1.0]]).is_err());
        assert!(Cloud::new(vec![vec![1.0], vec![2.0, 3.0]]).is_err());
        assert!(Cloud::new(vec![vec![1.0], vec![f64::NAN]]).is_err());
        assert!(Cloud::from_flat(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn marginal_medians_examples() {
        let c = cloud(&[&[0.0, 0.0], &[2.0, 2.0], &[4.0, 4.0]]);
        assert_eq!(marginal_medians(&c), vec![2.0, 2.0]);

        let c = cloud(&[&[1.5, -2.0], &[1.5, -2.0], &[1.5, -2.0]]);
        assert_eq!(marginal_medians(&c), vec![1.5, -2.0]);

        let c = cloud(&[&[1.0, 10.0], &[3.0, 30.0], &[5.0, 50.0], &[7.0, 70.0]]);
        assert_eq!(marginal_medians(&c), vec![4.0, 40.0]);
    }

    #[test]
    fn cross_cloud_distances() {
        // Center is (0,0) = the first row; the four unit points each sit at
        // scaled distance 1, the center row at 0.
        let c = cloud(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[-1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, -1.0],
        ]);
        let report = projection_distances(&c).unwrap();
        assert_eq!(report.center, vec![0.0, 0.0]);
        assert_eq!(report.skipped_directions, 1); // the row at the center
        let want = [0.0, 1.0, 1.0, 1.0, 1.0];
        for (got, want) in report.distances.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn row_at_center_has_zero_distance() {
        let c = cloud(&[
            &[1.0, 2.0],
            &[3.0, 1.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[1.0, 0.0],
        ]);
        let report = projection_distances(&c).unwrap();
        let center = report.center.clone();
        for (i, d) in report.distances.iter().enumerate() {
            if c.row(i) == center.as_slice() {
                assert_eq!(*d, 0.0);
            }
        }
    }

    #[test]
    fn one_dimensional_reduction() {
        // In one dimension every direction collapses to the same scaled
        // absolute deviation from the median.
        let xs = [3.1, -0.4, 2.2, 7.9, 5.0, 5.0, -2.6, 0.0, 1.3];
        let c = Cloud::new(xs.iter().map(|&x| vec![x]).collect()).unwrap();
        let report = projection_distances(&c).unwrap();

        let m = crate::quantiles::sample_median(&xs).unwrap();
        let dev: Vec<f64> = xs.iter().map(|x| (x - m).abs()).collect();
        let (q1, q2) = crate::quantiles::ideal_fourths(&dev).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let want = (x - m).abs() / (q2 - q1);
            assert!(
                (report.distances[i] - want).abs() < 1e-10,
                "row {i}: got {}, want {want}",
                report.distances[i]
            );
        }
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let c = cloud(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        assert!(matches!(
            projection_distances(&c),
            Err(Error::DegenerateCloud)
        ));
    }

    #[test]
    fn pvalue_endpoints_and_count() {
        let k = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(depth_pvalue(&k, 10.0), 0.0);
        assert_eq!(depth_pvalue(&k, 0.5), 1.0);
        assert_eq!(depth_pvalue(&k, 2.5), 0.5);
        // ties use >= exactly
        assert_eq!(depth_pvalue(&k, 2.0), 0.5);
    }

    #[test]
    fn pvalue_nonincreasing_in_null_distance() {
        let k = [0.3, 1.7, 2.2, 2.2, 5.0, 0.1];
        let mut prev = 1.0;
        for i in 0..60 {
            let p = depth_pvalue(&k, i as f64 * 0.1);
            assert!(p <= prev);
            prev = p;
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn cloud_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
        (2_usize..=3, 4_usize..=9).prop_flat_map(|(p, n)| {
            proptest::collection::vec(-10.0_f64..10.0, n * p).prop_map(move |data| (p, data))
        })
    }

    proptest! {
        #[test]
        fn location_invariance((p, data) in cloud_strategy(), shift in -25.0_f64..25.0) {
            let n = data.len() / p;
            let base = Cloud::from_flat(n, p, data.clone()).unwrap();
            let moved = Cloud::from_flat(
                n, p, data.iter().map(|v| v + shift).collect()
            ).unwrap();
            if let (Ok(a), Ok(b)) =
                (projection_distances(&base), projection_distances(&moved))
            {
                for (x, y) in a.distances.iter().zip(&b.distances) {
                    prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                }
            }
        }

        #[test]
        fn scale_invariance((p, data) in cloud_strategy(), scale in 0.05_f64..40.0) {
            let n = data.len() / p;
            let base = Cloud::from_flat(n, p, data.clone()).unwrap();
            let scaled = Cloud::from_flat(
                n, p, data.iter().map(|v| v * scale).collect()
            ).unwrap();
            if let (Ok(a), Ok(b)) =
                (projection_distances(&base), projection_distances(&scaled))
            {
                for (x, y) in a.distances.iter().zip(&b.distances) {
                    prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
                }
            }
        }

        #[test]
        fn permutation_equivariance((p, data) in cloud_strategy(), rot in 1_usize..5) {
            let n = data.len() / p;
            let base = Cloud::from_flat(n, p, data.clone()).unwrap();
            let rot = rot % n;
            let mut rows: Vec<Vec<f64>> =
                (0..n).map(|i| data[i * p..(i + 1) * p].to_vec()).collect();
            rows.rotate_left(rot);
            let permuted = Cloud::new(rows).unwrap();
            if let (Ok(a), Ok(b)) =
                (projection_distances(&base), projection_distances(&permuted))
            {
                let mut want = a.distances.clone();
                want.rotate_left(rot);
                for (x, y) in want.iter().zip(&b.distances) {
                    prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                }
            }
        }

        #[test]
        fn distances_nonnegative((p, data) in cloud_strategy()) {
            let n = data.len() / p;
            let c = Cloud::from_flat(n, p, data).unwrap();
            if let Ok(report) = projection_distances(&c) {
                prop_assert!(report.distances.iter().all(|&d| d >= 0.0));
            }
        }
    }
}
