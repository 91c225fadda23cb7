//! Scalar curvature from geodesic ball volumes.
//!
//! For a point `x` the pipeline is:
//!
//! 1. estimate ball volumes `v̂(r) = Σ_{z ∈ B(x,r), z ≠ x} 1/ρ̂(z) / (N − 1)`,
//! 2. form ratios `ŷ(r) = v̂(r) / (v_n rⁿ)` against the flat ball,
//! 3. fit `1 + C r²` by the discretized least-squares coefficient
//!    `Ĉ = Σ r_i² (ŷ_i − 1)(r_i − r_{i−1}) / ((r_max⁵ − r_min⁵)/5)`,
//! 4. report `Ŝ = −6 (n + 2) Ĉ`.
//!
//! Radii are either equally spaced or the distances to successive nearest
//! neighbors of `x`; in both cases the volume sum is accumulated in one pass
//! over the neighbors sorted by distance.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::intrinsic::{mean_ball_density, DensityField};
use crate::metric::{ball_count, EvaluationSet, Metric};

/// Volume of the unit Euclidean n-ball, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    (half * PI.ln() - ln_gamma(half + 1.0)).exp()
}

/// Volume of the Euclidean n-ball of radius `r`.
pub fn euclidean_ball_volume(n: usize, r: f64) -> f64 {
    unit_ball_volume(n) * r.powi(n as i32)
}

/// Estimated volume of one geodesic ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallVolumeEstimate {
    pub radius: f64,
    /// `N(x, r)`, excluding the center.
    pub count: usize,
    /// Harmonic-mean density over the ball.
    pub mean_density: f64,
    pub volume: f64,
}

/// Ball-volume estimate `N(x,r) / ((N − 1) ρ̄̂(x,r))`.
pub fn estimate_ball_volume<M: Metric + ?Sized>(
    d: &M,
    field: &DensityField,
    x: usize,
    r: f64,
) -> Result<BallVolumeEstimate> {
    check_field(d, field)?;
    let count = ball_count(d, x, r)?;
    let mean_density = mean_ball_density(field, d, x, r);
    let volume = count as f64 / ((d.len() - 1) as f64 * mean_density);
    Ok(BallVolumeEstimate {
        radius: r,
        count,
        mean_density,
        volume,
    })
}

fn check_field<M: Metric + ?Sized>(d: &M, field: &DensityField) -> Result<()> {
    if field.len() != d.len() {
        return Err(Error::InvalidParameter(format!(
            "density field has {} values for {} points",
            field.len(),
            d.len()
        )));
    }
    if d.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 points".into()));
    }
    Ok(())
}

/// Neighbors of a center point sorted by `(distance, index)`.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    center: usize,
    n_points: usize,
    sorted: Vec<(f64, usize)>,
}

impl Neighborhood {
    pub fn of<M: Metric + ?Sized>(d: &M, x: usize) -> Result<Self> {
        if x >= d.len() {
            return Err(Error::IndexOutOfRange {
                index: x,
                len: d.len(),
            });
        }
        let mut sorted: Vec<(f64, usize)> = d
            .row(x)
            .into_iter()
            .enumerate()
            .filter(|&(j, _)| j != x)
            .map(|(j, dist)| (dist, j))
            .collect();
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(Neighborhood {
            center: x,
            n_points: d.len(),
            sorted,
        })
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// `(distance, index)` pairs, nearest first.
    pub fn sorted(&self) -> &[(f64, usize)] {
        &self.sorted
    }

    pub fn farthest(&self) -> f64 {
        self.sorted.last().map_or(0.0, |p| p.0)
    }
}

/// How the radius sequence is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// `r_i` is the distance to the i-th nearest neighbor.
    NearestNeighbor,
    /// `r_i = r_min + i Δr`.
    EqualSpacing { step: f64 },
}

impl std::str::FromStr for ScheduleMode {
    type Err = Error;

    /// `nn` or `grid:<step>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "nn" {
            return Ok(ScheduleMode::NearestNeighbor);
        }
        if let Some(step) = s.strip_prefix("grid:") {
            let step: f64 = step
                .parse()
                .map_err(|e| Error::InvalidParameter(format!("grid step {step:?}: {e}")))?;
            return Ok(ScheduleMode::EqualSpacing { step });
        }
        Err(Error::InvalidParameter(format!(
            "schedule must be `nn` or `grid:<step>`, got {s:?}"
        )))
    }
}

/// Increasing radii `r_1 < … < r_m`, with `r_0 = r_min` implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    r_min: f64,
    radii: Vec<f64>,
    mode: Option<ScheduleMode>,
}

impl RadiusSchedule {
    /// `r_min + iΔr` for `i = 1..=m`; `(r_max − r_min)/Δr` must be an integer.
    pub fn equal_spacing(r_min: f64, r_max: f64, step: f64) -> Result<Self> {
        check_bounds(r_min, r_max)?;
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
        }
        let m_real = (r_max - r_min) / step;
        let m = m_real.round();
        if m < 1.0 || (m_real - m).abs() > 1e-9 * m.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "(r_max - r_min) / step = {m_real} is not a positive integer"
            )));
        }
        let m = m as usize;
        let mut radii: Vec<f64> = (1..m).map(|i| r_min + i as f64 * step).collect();
        radii.push(r_max);
        Ok(RadiusSchedule {
            r_min,
            radii,
            mode: Some(ScheduleMode::EqualSpacing { step }),
        })
    }

    /// Distinct neighbor distances in `(r_min, r_max]`. The effective `r_max`
    /// is the farthest retained neighbor distance.
    pub fn nearest_neighbor(nb: &Neighborhood, r_min: f64, r_max: f64) -> Result<Self> {
        check_bounds(r_min, r_max)?;
        let mut radii: Vec<f64> = Vec::new();
        for &(dist, _) in nb.sorted() {
            if dist > r_max {
                break;
            }
            if dist > r_min && radii.last() != Some(&dist) {
                radii.push(dist);
            }
        }
        if radii.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no neighbor of point {} lies in ({r_min}, {r_max}]",
                nb.center()
            )));
        }
        Ok(RadiusSchedule {
            r_min,
            radii,
            mode: Some(ScheduleMode::NearestNeighbor),
        })
    }

    /// An arbitrary increasing sequence above `r_min`.
    pub fn from_radii(r_min: f64, radii: Vec<f64>) -> Result<Self> {
        if !(r_min >= 0.0) {
            return Err(Error::InvalidParameter(format!("r_min must be nonnegative, got {r_min}")));
        }
        let mut prev = r_min;
        for &r in &radii {
            if !(r > prev) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "radii must be finite and strictly increase from r_min = {r_min}"
                )));
            }
            prev = r;
        }
        if radii.is_empty() {
            return Err(Error::InvalidParameter("radius schedule is empty".into()));
        }
        Ok(RadiusSchedule {
            r_min,
            radii,
            mode: None,
        })
    }

    /// Builds the schedule for one center point.
    pub fn for_point(mode: ScheduleMode, nb: &Neighborhood, r_min: f64, r_max: f64) -> Result<Self> {
        match mode {
            ScheduleMode::NearestNeighbor => Self::nearest_neighbor(nb, r_min, r_max),
            ScheduleMode::EqualSpacing { step } => Self::equal_spacing(r_min, r_max, step),
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().expect("schedule is never empty")
    }

    /// `r_1, …, r_m`.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn mode(&self) -> Option<ScheduleMode> {
        self.mode
    }
}

fn check_bounds(r_min: f64, r_max: f64) -> Result<()> {
    if !(r_min >= 0.0) {
        return Err(Error::InvalidParameter(format!("r_min must be nonnegative, got {r_min}")));
    }
    if !(r_max > r_min) {
        return Err(Error::InvalidParameter(format!(
            "r_max = {r_max} must exceed r_min = {r_min}"
        )));
    }
    Ok(())
}

/// One estimated ball-volume ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub radius: f64,
    pub ratio: f64,
}

/// Ball-volume ratios `ŷ(r_i)` along the schedule, accumulated in a single
/// pass over the sorted neighbors.
pub fn ratio_sequence_in(
    nb: &Neighborhood,
    field: &DensityField,
    schedule: &RadiusSchedule,
    n_hat: usize,
) -> Result<Vec<RatioPoint>> {
    let norm = 1.0 / (nb.n_points() - 1) as f64;
    let unit = unit_ball_volume(n_hat);
    let sorted = nb.sorted();
    let mut next = 0usize;
    let mut inv_sum = 0.0;
    let mut out = Vec::with_capacity(schedule.radii().len());
    for &r in schedule.radii() {
        while next < sorted.len() && sorted[next].0 <= r {
            inv_sum += 1.0 / field.get(sorted[next].1);
            next += 1;
        }
        if r <= 0.0 {
            continue;
        }
        let volume = inv_sum * norm;
        out.push(RatioPoint {
            radius: r,
            ratio: volume / (unit * r.powi(n_hat as i32)),
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter(
            "radius schedule has no positive radii".into(),
        ));
    }
    Ok(out)
}

/// Ball-volume ratios for point `x`.
pub fn ratio_sequence<M: Metric + ?Sized>(
    d: &M,
    field: &DensityField,
    x: usize,
    schedule: &RadiusSchedule,
    n_hat: usize,
) -> Result<Vec<RatioPoint>> {
    check_field(d, field)?;
    ratio_sequence_in(&Neighborhood::of(d, x)?, field, schedule, n_hat)
}

/// Discretized least-squares coefficient of `1 + C r²` through the ratios.
///
/// The ratio radii are the quadrature nodes, weighted by left differences
/// starting from `r_0 = r_min`; the denominator uses the schedule bounds.
pub fn fit_quadratic_coefficient(ratios: &[RatioPoint], schedule: &RadiusSchedule) -> Result<f64> {
    let (r_min, r_max) = (schedule.r_min(), schedule.r_max());
    if !(r_max > r_min) {
        return Err(Error::InvalidParameter(format!(
            "degenerate schedule: r_max = r_min = {r_min}"
        )));
    }
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("no ratios to fit".into()));
    }
    let mut prev = r_min;
    let mut numer = 0.0;
    for p in ratios {
        numer += p.radius * p.radius * (p.ratio - 1.0) * (p.radius - prev);
        prev = p.radius;
    }
    Ok(numer / ((r_max.powi(5) - r_min.powi(5)) / 5.0))
}

/// `Ŝ = −6 (n + 2) Ĉ`.
pub fn scalar_from_coefficient(c_hat: f64, n_hat: usize) -> f64 {
    -6.0 * (n_hat as f64 + 2.0) * c_hat
}

/// Per-point curvature estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub index: usize,
    pub n_hat: usize,
    pub ratios: Vec<RatioPoint>,
    pub c_hat: f64,
    pub s_hat: f64,
    pub true_s: Option<f64>,
    /// Largest radius actually used.
    pub r_max: f64,
}

/// Curvature estimate at `x` for a prepared schedule.
pub fn estimate_scalar_curvature<M: Metric + ?Sized>(
    d: &M,
    field: &DensityField,
    x: usize,
    schedule: &RadiusSchedule,
    n_hat: usize,
) -> Result<CurvatureReport> {
    let ratios = ratio_sequence(d, field, x, schedule, n_hat)?;
    report_from_ratios(x, n_hat, ratios, schedule)
}

fn report_from_ratios(
    x: usize,
    n_hat: usize,
    ratios: Vec<RatioPoint>,
    schedule: &RadiusSchedule,
) -> Result<CurvatureReport> {
    let c_hat = fit_quadratic_coefficient(&ratios, schedule)?;
    Ok(CurvatureReport {
        index: x,
        n_hat,
        ratios,
        c_hat,
        s_hat: scalar_from_coefficient(c_hat, n_hat),
        true_s: None,
        r_max: schedule.r_max(),
    })
}

/// Radius hyperparameters shared by every evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimator {
    pub r_min: f64,
    pub r_max: f64,
    pub schedule: ScheduleMode,
}

impl CurvatureEstimator {
    pub fn nearest_neighbor(r_min: f64, r_max: f64) -> Self {
        CurvatureEstimator {
            r_min,
            r_max,
            schedule: ScheduleMode::NearestNeighbor,
        }
    }

    pub fn estimate_point<M: Metric + ?Sized>(
        &self,
        d: &M,
        field: &DensityField,
        x: usize,
        n_hat: usize,
    ) -> Result<CurvatureReport> {
        check_field(d, field)?;
        self.estimate_with_neighborhood(&Neighborhood::of(d, x)?, field, n_hat)
    }

    fn estimate_with_neighborhood(
        &self,
        nb: &Neighborhood,
        field: &DensityField,
        n_hat: usize,
    ) -> Result<CurvatureReport> {
        let schedule = RadiusSchedule::for_point(self.schedule, nb, self.r_min, self.r_max)?;
        let ratios = ratio_sequence_in(nb, field, &schedule, n_hat)?;
        report_from_ratios(nb.center(), n_hat, ratios, &schedule)
    }

    /// Estimates at every index of `points`, in index order.
    pub fn estimate<M: Metric + ?Sized>(
        &self,
        d: &M,
        field: &DensityField,
        points: &EvaluationSet,
        n_hat: usize,
    ) -> Result<Vec<CurvatureReport>> {
        check_field(d, field)?;
        let results: Vec<(CurvatureReport, bool)> = points
            .indices()
            .par_iter()
            .map(|&x| {
                let nb = Neighborhood::of(d, x)?;
                let truncated = self.schedule == ScheduleMode::NearestNeighbor
                    && nb.farthest() < self.r_max;
                Ok((self.estimate_with_neighborhood(&nb, field, n_hat)?, truncated))
            })
            .collect::<Result<_>>()?;
        let truncated: Vec<f64> = results
            .iter()
            .filter(|(_, t)| *t)
            .map(|(r, _)| r.r_max)
            .collect();
        if let Some(min) = truncated.iter().copied().reduce(f64::min) {
            log::warn!(
                "r_max = {} exceeds the farthest neighbor at {} points; effective r_max as low as {min}",
                self.r_max,
                truncated.len()
            );
        }
        Ok(results.into_iter().map(|(r, _)| r).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CloudMetric, DistanceMatrix, PointCloud};
    use crate::oracles;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(pos: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(pos.len(), |i, j| (pos[i] - pos[j]).abs()).unwrap()
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((euclidean_ball_volume(2, 1.0) - PI).abs() < 1e-14);
        assert!((euclidean_ball_volume(3, 2.0) - 32.0 * PI / 3.0).abs() < 1e-12);
        let v7 = 16.0 * PI.powi(3) / 105.0;
        assert!((unit_ball_volume(7) - v7).abs() < 1e-12);
        assert!((v7 - 4.7248).abs() < 1e-4);
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_density_ball_volume() {
        // N = 101, ten points in the ball
        let mut pos = vec![0.0];
        pos.extend((1..=10).map(|i| i as f64 * 0.01));
        pos.extend((0..90).map(|i| 10.0 + i as f64));
        let d = line(&pos);
        let rho = 1.0 / (4.0 * PI);
        let field = DensityField::oracle(vec![rho; 101], 2).unwrap();
        let est = estimate_ball_volume(&d, &field, 0, 0.5).unwrap();
        assert_eq!(est.count, 10);
        assert!((est.volume - 0.4 * PI).abs() < 1e-12);
    }

    #[test]
    fn inverse_density_sum_form() {
        let d = line(&[0.0, 1.0, 1.5, 9.0, 10.0]);
        let field = DensityField::oracle(vec![1.0, 2.0, 4.0, 1.0, 1.0], 1).unwrap();
        let est = estimate_ball_volume(&d, &field, 0, 2.0).unwrap();
        assert!((est.volume - 0.1875).abs() < 1e-15);
        assert!((oracles::ball_volume_inverse_sum(&d, &field, 0, 2.0) - 0.1875).abs() < 1e-15);
        let empty = estimate_ball_volume(&d, &field, 0, 0.5).unwrap();
        assert_eq!(empty.count, 0);
        assert_eq!(empty.volume, 0.0);
        assert_eq!(empty.mean_density, 1.0);
    }

    #[test]
    fn single_point_ratio() {
        let mut pos = vec![0.0, 0.3];
        pos.extend((0..99).map(|i| 5.0 + i as f64));
        let d = line(&pos);
        let field = DensityField::oracle(vec![1.0 / (4.0 * PI); 101], 2).unwrap();
        let schedule = RadiusSchedule::from_radii(0.0, vec![0.5]).unwrap();
        let ratios = ratio_sequence(&d, &field, 0, &schedule, 2).unwrap();
        assert!((ratios[0].ratio - 0.16).abs() < 1e-12);
    }

    #[test]
    fn flat_grid_ratios_near_one() {
        let side = 81;
        let h = 1.0 / (side - 1) as f64;
        let pts: Vec<f64> = (0..side * side)
            .flat_map(|k| [(k % side) as f64 * h, (k / side) as f64 * h])
            .collect();
        let cloud = PointCloud::new(2, pts).unwrap();
        let metric = CloudMetric::euclidean(&cloud);
        let n = side * side;
        // lattice density is 1/h² points per unit area
        let field = DensityField::oracle(vec![1.0 / ((n - 1) as f64 * h * h); n], 2).unwrap();
        let center = (side / 2) * side + side / 2;
        let schedule = RadiusSchedule::equal_spacing(0.0, 0.4, 0.05).unwrap();
        let ratios = ratio_sequence(&metric, &field, center, &schedule, 2).unwrap();
        for p in ratios.iter().skip(2) {
            assert!((p.ratio - 1.0).abs() < 0.05, "r {}: {}", p.radius, p.ratio);
        }
    }

    #[test]
    fn incremental_matches_direct_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let n = rng.random_range(5..60);
            let pts: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
            let cloud = PointCloud::new(2, pts).unwrap();
            let d = CloudMetric::euclidean(&cloud).to_matrix().unwrap();
            let field =
                DensityField::oracle((0..n).map(|_| rng.random_range(0.2..3.0)).collect(), 2).unwrap();
            let x = rng.random_range(0..n);
            let nb = Neighborhood::of(&d, x).unwrap();
            let schedule = RadiusSchedule::nearest_neighbor(&nb, 0.0, 0.7).unwrap();
            let fast = ratio_sequence(&d, &field, x, &schedule, 2).unwrap();
            let slow = oracles::ratio_sequence_direct(&d, &field, x, &schedule, 2);
            assert_eq!(fast.len(), slow.len());
            for (a, b) in fast.iter().zip(&slow) {
                assert_eq!(a.radius.to_bits(), b.radius.to_bits());
                assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
            }
        }
    }

    #[test]
    fn quadratic_fit_cases() {
        let schedule = RadiusSchedule::from_radii(0.0, (1..=1000).map(|i| i as f64 / 1000.0).collect()).unwrap();
        let flat: Vec<RatioPoint> = schedule.radii().iter().map(|&r| RatioPoint { radius: r, ratio: 1.0 }).collect();
        assert_eq!(fit_quadratic_coefficient(&flat, &schedule).unwrap(), 0.0);

        let curved: Vec<RatioPoint> = schedule
            .radii()
            .iter()
            .map(|&r| RatioPoint { radius: r, ratio: 1.0 - r * r })
            .collect();
        let c = fit_quadratic_coefficient(&curved, &schedule).unwrap();
        assert!((c + 1.0).abs() < 0.005, "{c}");

        let one = RadiusSchedule::from_radii(0.0, vec![1.0]).unwrap();
        let c1 = fit_quadratic_coefficient(&[RatioPoint { radius: 1.0, ratio: 1.2 }], &one).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_from_coefficient_cases() {
        assert_eq!(scalar_from_coefficient(0.0, 2), 0.0);
        assert!((scalar_from_coefficient(-1.0 / 12.0, 2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn schedules_validate() {
        assert!(RadiusSchedule::equal_spacing(0.0, 1.0, 0.3).is_err());
        assert!(RadiusSchedule::equal_spacing(1.0, 1.0, 0.1).is_err());
        let s = RadiusSchedule::equal_spacing(0.0, 1.0, 0.25).unwrap();
        assert_eq!(s.radii(), &[0.25, 0.5, 0.75, 1.0]);
        assert!(RadiusSchedule::from_radii(0.0, vec![0.5, 0.5]).is_err());
        assert!(RadiusSchedule::from_radii(0.0, vec![]).is_err());
        assert!("grid:0.1".parse::<ScheduleMode>().is_ok());
        assert!("nope".parse::<ScheduleMode>().is_err());
    }

    #[test]
    fn nearest_neighbor_schedule_merges_ties_and_truncates() {
        let d = line(&[0.0, 1.0, -1.0, 2.0, 5.0]);
        let nb = Neighborhood::of(&d, 0).unwrap();
        let s = RadiusSchedule::nearest_neighbor(&nb, 0.0, 3.0).unwrap();
        assert_eq!(s.radii(), &[1.0, 2.0]);
        assert_eq!(s.r_max(), 2.0);
        let all = RadiusSchedule::nearest_neighbor(&nb, 0.0, 100.0).unwrap();
        assert_eq!(all.r_max(), 5.0);
        assert!(RadiusSchedule::nearest_neighbor(&nb, 0.0, 0.5).is_err());
        // ties at r = 1 both count toward N(x, 1)
        let field = DensityField::oracle(vec![1.0; 5], 1).unwrap();
        let ratios = ratio_sequence_in(&nb, &field, &s, 1).unwrap();
        assert!((ratios[0].ratio - (2.0 / 4.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn duplicates_at_center_do_not_crash() {
        let d = line(&[0.0, 0.0, 0.5, 1.0]);
        let field = DensityField::oracle(vec![1.0; 4], 1).unwrap();
        let est = CurvatureEstimator::nearest_neighbor(0.0, 1.0);
        let report = est.estimate_point(&d, &field, 0, 1).unwrap();
        assert!(report.ratios.iter().all(|p| p.radius > 0.0 && p.ratio.is_finite()));
        assert!(report.s_hat.is_finite());
    }

    fn sphere_with_pole(n: usize, seed: u64) -> PointCloud {
        let mut s = crate::samplers::sample_sphere(2, n, seed).unwrap().cloud;
        let c = s.coords_mut();
        c[0] = 0.0;
        c[1] = 0.0;
        c[2] = 1.0;
        s
    }

    #[test]
    fn ball_volume_unbiased_small() {
        let reps = 400;
        let r = 0.5f64;
        let truth = 2.0 * PI * (1.0 - r.cos());
        let vals: Vec<f64> = (0..reps)
            .map(|k| {
                let cloud = sphere_with_pole(300, 1000 + k);
                let m = CloudMetric::new(&cloud, crate::samplers::sphere_geodesic);
                let field = DensityField::oracle(vec![1.0 / (4.0 * PI); 300], 2).unwrap();
                estimate_ball_volume(&m, &field, 0, r).unwrap().volume
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        let se = (var / reps as f64).sqrt();
        assert!((mean - truth).abs() < 3.0 * se, "mean {mean} truth {truth} se {se}");

        // variance formula with uniform density: var N(x,r) / ((N−1)² ρ²)
        let rho = 1.0 / (4.0 * PI);
        let p = rho * truth;
        let predicted = 299.0 * p * (1.0 - p) / (299.0f64.powi(2) * rho * rho);
        // standard error of a sample variance ≈ var · sqrt(2/(reps−1)) for near-Gaussian data
        let se_var = predicted * (2.0 / (reps as f64 - 1.0)).sqrt();
        assert!((var - predicted).abs() < 3.0 * se_var, "var {var} predicted {predicted}");
    }

    #[test]
    fn estimator_reports_in_index_order() {
        let s = crate::samplers::sample_sphere(2, 400, 3).unwrap();
        let d = s.exact_distances().unwrap().unwrap();
        let field = DensityField::oracle(s.true_density.clone(), 2).unwrap();
        let est = CurvatureEstimator::nearest_neighbor(0.0, PI / 2.0);
        let set = EvaluationSet::new(vec![7, 2, 300], 400).unwrap();
        let reports = est.estimate(&d, &field, &set, 2).unwrap();
        assert_eq!(reports.iter().map(|r| r.index).collect::<Vec<_>>(), vec![2, 7, 300]);
        for r in &reports {
            assert_eq!(r.s_hat, -6.0 * (r.n_hat as f64 + 2.0) * r.c_hat);
            assert!(r.r_max <= PI / 2.0);
        }
    }

    proptest! {
        #[test]
        fn affine_response_of_fit(
            seed in any::<u64>(),
            shift in -2.0f64..2.0,
            m in 1usize..40,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut radii: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..2.0)).collect();
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            let r_min = radii[0] * rng.random::<f64>();
            let schedule = RadiusSchedule::from_radii(r_min, radii.clone()).unwrap();
            let base: Vec<RatioPoint> = radii.iter().map(|&r| RatioPoint { radius: r, ratio: rng.random_range(0.0..2.0) }).collect();
            let shifted: Vec<RatioPoint> = base.iter().map(|p| RatioPoint { radius: p.radius, ratio: p.ratio + shift }).collect();
            let c0 = fit_quadratic_coefficient(&base, &schedule).unwrap();
            let c1 = fit_quadratic_coefficient(&shifted, &schedule).unwrap();
            let mut prev = r_min;
            let mut weight = 0.0;
            for &r in &radii {
                weight += r * r * (r - prev);
                prev = r;
            }
            let r_max = *radii.last().unwrap();
            let expected = shift * weight / ((r_max.powi(5) - r_min.powi(5)) / 5.0);
            prop_assert!((c1 - c0 - expected).abs() <= 1e-9 * (1.0 + expected.abs() + c0.abs()));
        }

        #[test]
        fn scale_covariance(seed in 0u64..1000, lambda in 0.2f64..5.0) {
            let s = crate::samplers::sample_sphere(2, 120, seed).unwrap();
            let d = s.exact_distances().unwrap().unwrap();
            let field = DensityField::oracle(s.true_density.clone(), 2).unwrap();
            let scaled_d = d.scaled(lambda).unwrap();
            let scaled_field = DensityField::oracle(
                s.true_density.iter().map(|v| v / (lambda * lambda)).collect(), 2).unwrap();
            let est = CurvatureEstimator::nearest_neighbor(0.0, 1.2);
            let est_scaled = CurvatureEstimator::nearest_neighbor(0.0, 1.2 * lambda);
            let a = est.estimate_point(&d, &field, 0, 2).unwrap();
            let b = est_scaled.estimate_point(&scaled_d, &scaled_field, 0, 2).unwrap();
            let expected = a.s_hat / (lambda * lambda);
            prop_assert!((b.s_hat - expected).abs() <= 1e-9 * expected.abs().max(1e-3));
        }
    }
}
