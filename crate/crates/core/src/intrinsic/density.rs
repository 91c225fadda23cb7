use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::unit_ball_volume;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Radial kernel profile used for density estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `exp(-u²/2)`, normalized by `(2π)^{-n/2}`.
    Gaussian,
    /// `(1 - u²)²` on `u ≤ 1`, normalized over the unit n-ball.
    Biweight,
}

impl Kernel {
    #[inline]
    pub fn profile(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * u * u).exp(),
            Kernel::Biweight => {
                if u <= 1.0 {
                    let t = 1.0 - u * u;
                    t * t
                } else {
                    0.0
                }
            }
        }
    }

    /// Constant making the profile integrate to one over `R^n`.
    pub fn normalization(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Kernel::Gaussian => (2.0 * PI).powf(-0.5 * nf),
            Kernel::Biweight => (nf + 2.0) * (nf + 4.0) / (8.0 * unit_ball_volume(n)),
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Kernel::Gaussian),
            "biweight" => Ok(Kernel::Biweight),
            other => Err(Error::InvalidParameter(format!("unknown kernel {other:?}"))),
        }
    }
}

/// Which distances fed the density estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceSource {
    Exact,
    Graph,
    Euclidean,
    /// Ground-truth density injected directly; no kernel involved.
    Oracle,
}

/// Per-point density estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    values: Vec<f64>,
    pub kernel: Option<Kernel>,
    pub bandwidth: Option<f64>,
    pub distance_source: Option<DistanceSource>,
    pub dimension: usize,
}

impl DensityField {
    /// Injects known densities, e.g. the ground truth of a synthetic sample.
    pub fn oracle(values: Vec<f64>, dimension: usize) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "density at point {i} is {v}; densities must be positive and finite"
            )));
        }
        Ok(DensityField {
            values,
            kernel: None,
            bandwidth: None,
            distance_source: Some(DistanceSource::Oracle),
            dimension,
        })
    }

    pub fn with_distance_source(mut self, source: DistanceSource) -> Self {
        self.distance_source = Some(source);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Kernel density estimate at every point, using the given distances.
///
/// `ρ̂(x) = c_K / (N hⁿ) · Σ_z K(d(x, z) / h)`, the sum including `z = x`.
pub fn kde_density<M: Metric + ?Sized>(
    d: &M,
    n_hat: usize,
    kernel: Kernel,
    bandwidth: f64,
) -> Result<DensityField> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    if n_hat < 1 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let n = d.len();
    let scale = kernel.normalization(n_hat) / (n as f64 * bandwidth.powi(n_hat as i32));
    let inv_h = 1.0 / bandwidth;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let sum: f64 = d.row(i).iter().map(|&dist| kernel.profile(dist * inv_h)).sum();
            scale * sum
        })
        .collect();
    if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::ZeroDensity { index, bandwidth });
    }
    Ok(DensityField {
        values,
        kernel: Some(kernel),
        bandwidth: Some(bandwidth),
        distance_source: None,
        dimension: n_hat,
    })
}

/// Mean distance from each point to its `⌈√N⌉`-th nearest neighbor
/// (capped at the farthest neighbor).
pub fn default_bandwidth<M: Metric + ?Sized>(d: &M, n_hat: usize) -> Result<f64> {
    let _ = n_hat;
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "bandwidth rule needs at least 2 points".into(),
        ));
    }
    let rank = ((n as f64).sqrt().ceil() as usize).clamp(1, n - 1);
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = d.row(i);
            row.swap_remove(i);
            *row.select_nth_unstable_by(rank - 1, f64::total_cmp).1
        })
        .sum();
    let h = total / n as f64;
    if !(h > 0.0) {
        return Err(Error::InvalidMatrix(
            "all neighbor distances are zero; cannot choose a bandwidth".into(),
        ));
    }
    Ok(h)
}

/// Harmonic mean of `ρ̂` over the ball of radius `r` around `x`, excluding
/// `x`; falls back to `ρ̂(x)` when the ball holds no other point.
pub fn mean_ball_density<M: Metric + ?Sized>(field: &DensityField, d: &M, x: usize, r: f64) -> f64 {
    let mut count = 0usize;
    let mut inv_sum = 0.0;
    for (z, dist) in d.row(x).into_iter().enumerate() {
        if z != x && dist <= r {
            count += 1;
            inv_sum += 1.0 / field.get(z);
        }
    }
    if count == 0 {
        field.get(x)
    } else {
        count as f64 / inv_sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CloudMetric, DistanceMatrix, PointCloud};
    use crate::samplers::sample_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point_gaussian() {
        let cloud = PointCloud::new(2, vec![0.3, 0.4]).unwrap();
        let d = CloudMetric::euclidean(&cloud).to_matrix().unwrap();
        for h in [0.1, 1.0, 3.0] {
            let field = kde_density(&d, 2, Kernel::Gaussian, h).unwrap();
            let expected = (2.0 * PI).powf(-1.0) / (h * h);
            assert!((field.get(0) - expected).abs() < 1e-15 * expected.max(1.0));
        }
    }

    #[test]
    fn biweight_constant_one_dimension() {
        assert!((Kernel::Biweight.normalization(1) - 15.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn kernels_integrate_to_one() {
        // radial quadrature oracle: ∫ c_K K(|u|) du = c_K · n v_n ∫ K(r) r^{n-1} dr
        for kernel in [Kernel::Gaussian, Kernel::Biweight] {
            for n in 1..=7 {
                let steps = 200_000;
                let top = if kernel == Kernel::Gaussian { 20.0 } else { 1.0 };
                let dr = top / steps as f64;
                let radial: f64 = (0..steps)
                    .map(|i| {
                        let r = (i as f64 + 0.5) * dr;
                        kernel.profile(r) * r.powi(n as i32 - 1) * dr
                    })
                    .sum();
                let total = kernel.normalization(n) * n as f64 * unit_ball_volume(n) * radial;
                assert!((total - 1.0).abs() < 1e-6, "{kernel:?} n={n}: {total}");
            }
        }
    }

    #[test]
    fn sphere_density_is_near_uniform() {
        let s = sample_sphere(2, 4000, 12).unwrap();
        let d = s.exact_distances().unwrap().unwrap();
        let h = default_bandwidth(&d, 2).unwrap();
        let field = kde_density(&d, 2, Kernel::Gaussian, h).unwrap();
        let mean = field.values().iter().sum::<f64>() / field.len() as f64;
        let truth = 1.0 / (4.0 * PI);
        assert!((mean / truth - 1.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn bandwidth_rule() {
        let two = DistanceMatrix::from_fn(2, |_, _| 1.0).unwrap();
        assert_eq!(default_bandwidth(&two, 1).unwrap(), 1.0);

        // 1-D grid with spacing s: the 10th neighbor is 5s away in the
        // interior and up to 10s away at the ends
        let s = 0.25;
        let grid = DistanceMatrix::from_fn(100, |i, j| s * (i as f64 - j as f64).abs()).unwrap();
        let brute: f64 = (0..100)
            .map(|i| {
                let mut row: Vec<f64> = (0..100).filter(|&j| j != i).map(|j| grid.get(i, j)).collect();
                row.sort_by(f64::total_cmp);
                row[9]
            })
            .sum::<f64>()
            / 100.0;
        let h = default_bandwidth(&grid, 1).unwrap();
        assert!((h - brute).abs() < 1e-12);
        assert!((h - 5.3 * s).abs() < 1e-12);

        let dup = DistanceMatrix::from_fn(3, |_, _| 0.0).unwrap();
        assert!(default_bandwidth(&dup, 1).is_err());
    }

    #[test]
    fn harmonic_mean_cases() {
        let d = DistanceMatrix::from_fn(3, |i, j| (i as f64 - j as f64).abs()).unwrap();
        let field = DensityField::oracle(vec![5.0, 1.0, 3.0], 1).unwrap();
        assert!((mean_ball_density(&field, &d, 0, 2.0) - 1.5).abs() < 1e-15);
        assert_eq!(mean_ball_density(&field, &d, 0, 0.5), 5.0);
        let flat = DensityField::oracle(vec![0.7; 3], 1).unwrap();
        assert!((mean_ball_density(&flat, &d, 1, 10.0) - 0.7).abs() < 1e-15);
        assert!(DensityField::oracle(vec![1.0, 0.0], 1).is_err());
    }

    #[test]
    fn harmonic_mean_below_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let vals: Vec<f64> = (0..10).map(|_| rng.random_range(0.1..5.0)).collect();
            let d = DistanceMatrix::from_fn(10, |_, _| 1.0).unwrap();
            let field = DensityField::oracle(vals.clone(), 1).unwrap();
            let h = mean_ball_density(&field, &d, 0, 1.0);
            let arith = vals[1..].iter().sum::<f64>() / 9.0;
            assert!(h <= arith + 1e-12);
        }
    }

    #[test]
    fn kde_permutation_invariant() {
        let s = sample_sphere(2, 300, 6).unwrap();
        let d = s.exact_distances().unwrap().unwrap();
        let field = kde_density(&d, 2, Kernel::Biweight, 0.4).unwrap();
        let perm: Vec<usize> = (0..300).map(|i| (i * 7 + 3) % 300).collect();
        let dp = DistanceMatrix::from_fn(300, |i, j| d.get(perm[i], perm[j])).unwrap();
        let fp = kde_density(&dp, 2, Kernel::Biweight, 0.4).unwrap();
        for i in 0..300 {
            let (a, b) = (fp.get(i), field.get(perm[i]));
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn harmonic_mean_unbiased_for_inverse_density() {
        // density 0.5 + t on [0, 1]; ball [0.2, 0.8] around x = 0.5 has
        // mean density 1, so E[1/ρ̄̂ | N > 0] = 1
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let draw = |rng: &mut ChaCha8Rng| {
            // inverse CDF of 0.5 t + t²/2
            let u: f64 = rng.random();
            -0.5 + (0.25 + 2.0 * u).sqrt()
        };
        let reps = 2000;
        let mut vals = Vec::with_capacity(reps);
        while vals.len() < reps {
            let mut pts = vec![0.5];
            pts.extend((0..40).map(|_| draw(&mut rng)));
            let cloud = PointCloud::new(1, pts.clone()).unwrap();
            let metric = CloudMetric::euclidean(&cloud);
            let inside = pts[1..].iter().filter(|p| (**p - 0.5).abs() <= 0.3).count();
            if inside == 0 {
                continue;
            }
            let field = DensityField::oracle(pts.iter().map(|t| 0.5 + t).collect(), 1).unwrap();
            vals.push(1.0 / mean_ball_density(&field, &metric, 0, 0.3));
        }
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        let se = (var / reps as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }
}
