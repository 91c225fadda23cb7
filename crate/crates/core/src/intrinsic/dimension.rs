use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::Metric;

/// Levina–Bickel maximum-likelihood dimension estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub n_hat: usize,
    /// Mean over points of the per-point estimate, for each `k` in `k1..=k2`.
    pub raw_values: Vec<f64>,
    pub k1: usize,
    pub k2: usize,
}

impl DimensionEstimate {
    fn from_raw(raw_values: Vec<f64>, k1: usize, k2: usize) -> Self {
        let mean = raw_values.iter().sum::<f64>() / raw_values.len() as f64;
        DimensionEstimate {
            n_hat: (mean.round() as usize).max(1),
            raw_values,
            k1,
            k2,
        }
    }

    /// Unrounded mean of the per-k averages.
    pub fn mean(&self) -> f64 {
        self.raw_values.iter().sum::<f64>() / self.raw_values.len() as f64
    }

    /// Re-aggregates over the narrower range `k1..=k2` without touching the data.
    pub fn truncated(&self, k2: usize) -> Result<Self> {
        if k2 < self.k1 || k2 > self.k2 {
            return Err(Error::InvalidParameter(format!(
                "k2 = {k2} outside computed range {}..={}",
                self.k1, self.k2
            )));
        }
        Ok(Self::from_raw(
            self.raw_values[..=k2 - self.k1].to_vec(),
            self.k1,
            k2,
        ))
    }
}

/// Levina–Bickel estimate using the given (typically geodesic) distances.
///
/// For each point, `T_j` is the distance to its j-th nearest neighbor and
/// the per-point estimate is `[(1/(k-1)) Σ_{j<k} ln(T_k/T_j)]^{-1}`. Points
/// with a zero nearest-neighbor distance are skipped, and per-point values
/// with `T_k = T_1` are excluded, each with a warning.
pub fn levina_bickel<M: Metric + ?Sized>(d: &M, k1: usize, k2: usize) -> Result<DimensionEstimate> {
    let n = d.len();
    if k1 < 2 || k1 > k2 || k2 + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= k1 <= k2 <= N - 1, got k1 = {k1}, k2 = {k2}, N = {n}"
        )));
    }
    let per_point: Vec<Option<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = d.row(i);
            row.swap_remove(i);
            row.select_nth_unstable_by(k2 - 1, f64::total_cmp);
            let nearest = &mut row[..k2];
            nearest.sort_unstable_by(f64::total_cmp);
            if nearest[0] <= 0.0 {
                return None;
            }
            // prefix[j] = Σ_{l<j} ln T_{l+1}
            let mut values = Vec::with_capacity(k2 - k1 + 1);
            let mut log_sum = 0.0;
            for k in 1..=k2 {
                let log_tk = nearest[k - 1].ln();
                if k >= k1 {
                    let s = (k - 1) as f64 * log_tk - log_sum;
                    values.push(if s > 0.0 { (k - 1) as f64 / s } else { f64::NAN });
                }
                log_sum += log_tk;
            }
            Some(values)
        })
        .collect();

    let skipped = per_point.iter().filter(|p| p.is_none()).count();
    if skipped > 0 {
        log::warn!("dimension estimate: skipped {skipped} points with duplicate neighbors");
    }
    let mut excluded = 0usize;
    let raw_values: Vec<f64> = (0..=k2 - k1)
        .map(|col| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for v in per_point.iter().flatten() {
                if v[col].is_finite() {
                    sum += v[col];
                    count += 1;
                } else {
                    excluded += 1;
                }
            }
            if count == 0 {
                f64::NAN
            } else {
                sum / count as f64
            }
        })
        .collect();
    if excluded > 0 {
        log::warn!("dimension estimate: excluded {excluded} degenerate per-point values (all neighbor distances tied)");
    }
    if raw_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix(
            "no point has distinct neighbor distances; dimension is undefined".into(),
        ));
    }
    Ok(DimensionEstimate::from_raw(raw_values, k1, k2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CloudMetric, DistanceMatrix, PointCloud};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_evaluated_three_neighbors() {
        // point 0 at the origin with neighbors at 1, 2, 3 on a line
        let pos = [0.0f64, 1.0, -2.0, 3.0];
        let d = DistanceMatrix::from_fn(4, |i, j| (pos[i] - pos[j]).abs()).unwrap();
        let row = d.row(0);
        let mut t: Vec<f64> = row[1..].to_vec();
        t.sort_by(f64::total_cmp);
        assert_eq!(t, vec![1.0, 2.0, 3.0]);
        let expected = 2.0 / ((3.0f64).ln() + (1.5f64).ln());
        assert!((expected - 1.3297).abs() < 1e-4);

        // a metric where every point sees neighbors at 1, 2, 3
        let star = DistanceMatrix::from_fn(4, |i, j| match (i, j) {
            (1, 0) | (3, 2) => 1.0,
            (2, 0) | (3, 1) => 2.0,
            _ => 3.0,
        })
        .unwrap();
        let est = levina_bickel(&star, 3, 3).unwrap();
        assert!((est.raw_values[0] - expected).abs() < 1e-12);
        assert_eq!(est.n_hat, 1);
    }

    #[test]
    fn unit_square_is_two_dimensional() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cloud = PointCloud::new(2, (0..20_000).map(|_| rng.random::<f64>()).collect()).unwrap();
        let est = levina_bickel(&CloudMetric::euclidean(&cloud), 20, 40).unwrap();
        assert_eq!(est.n_hat, 2, "mean {}", est.mean());
    }

    #[test]
    fn invariant_under_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cloud = PointCloud::new(3, (0..900).map(|_| rng.random::<f64>()).collect()).unwrap();
        let d = CloudMetric::euclidean(&cloud).to_matrix().unwrap();
        let a = levina_bickel(&d, 5, 20).unwrap();
        let b = levina_bickel(&d.scaled(2.0).unwrap(), 5, 20).unwrap();
        assert_eq!(a.n_hat, b.n_hat);
        for (x, y) in a.raw_values.iter().zip(&b.raw_values) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn truncation_matches_direct_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cloud = PointCloud::new(2, (0..600).map(|_| rng.random::<f64>()).collect()).unwrap();
        let d = CloudMetric::euclidean(&cloud);
        let wide = levina_bickel(&d, 5, 30).unwrap();
        let narrow = levina_bickel(&d, 5, 12).unwrap();
        assert_eq!(wide.truncated(12).unwrap(), narrow);
        assert!(wide.truncated(31).is_err());
    }

    #[test]
    fn duplicates_are_skipped() {
        let mut pts: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        pts.push(pts[0].clone());
        let cloud = PointCloud::from_points(&pts).unwrap();
        let est = levina_bickel(&CloudMetric::euclidean(&cloud), 3, 6).unwrap();
        assert!(est.raw_values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_bad_ranges() {
        let d = DistanceMatrix::from_fn(5, |i, j| (i + j) as f64).unwrap();
        assert!(levina_bickel(&d, 1, 3).is_err());
        assert!(levina_bickel(&d, 3, 2).is_err());
        assert!(levina_bickel(&d, 2, 5).is_err());
    }
}
