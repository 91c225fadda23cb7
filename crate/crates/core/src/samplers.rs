//! Synthetic manifolds with exact geodesics and closed-form scalar curvature.
//!
//! Every sampler is a pure function of its parameters and seed.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::metric::{euclidean_distance, CloudMetric, DistanceMatrix, EvaluationSet, PointCloud};

/// Which manifold a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldTag {
    Sphere { dim: usize },
    EuclideanDisk { radius: f64 },
    PoincareDisk { hyperbolic_radius: f64 },
    Torus { tube_radius: f64, center_radius: f64 },
    Hyperboloid,
}

impl ManifoldTag {
    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            ManifoldTag::Sphere { dim } => dim,
            _ => 2,
        }
    }
}

/// How exact geodesic distances are recovered from stored coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactGeometry {
    /// Great-circle distance on the unit sphere.
    Sphere,
    /// Flat distance in the plane.
    Euclidean,
    /// Hyperbolic distance between points of the Poincaré unit disk.
    PoincareDisk,
}

impl ExactGeometry {
    pub fn distance_fn(self) -> fn(&[f64], &[f64]) -> f64 {
        match self {
            ExactGeometry::Sphere => sphere_geodesic,
            ExactGeometry::Euclidean => euclidean_distance,
            ExactGeometry::PoincareDisk => poincare_distance,
        }
    }
}

/// Isotropic Gaussian noise applied to ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

pub type ExactMetric<'a> = CloudMetric<'a, fn(&[f64], &[f64]) -> f64>;

/// A point cloud sampled from a known manifold, with ground-truth labels.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub tag: ManifoldTag,
    /// Ambient coordinates; for the Poincaré disk these are disk-model
    /// coordinates and `embedded` is false.
    pub cloud: PointCloud,
    pub embedded: bool,
    pub exact: Option<ExactGeometry>,
    pub true_curvature: Vec<f64>,
    pub true_density: Vec<f64>,
    pub evaluation: EvaluationSet,
    /// A per-point chart coordinate for plotting against curvature
    /// (tube angle θ on the torus, height z on the hyperboloid).
    pub chart: Option<Vec<f64>>,
    pub noise_sigma: f64,
}

impl LabeledSample {
    pub fn n_points(&self) -> usize {
        self.cloud.n_points()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.tag.intrinsic_dim()
    }

    /// Exact geodesic distances evaluated lazily from coordinates.
    pub fn exact_metric(&self) -> Option<ExactMetric<'_>> {
        self.exact
            .map(|g| CloudMetric::new(&self.cloud, g.distance_fn()))
    }

    /// Materialized exact geodesic distance matrix, when one is defined.
    pub fn exact_distances(&self) -> Option<Result<DistanceMatrix>> {
        self.exact_metric().map(|m| m.to_matrix())
    }
}

/// Ground truth read back from a labels CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub true_curvature: Vec<f64>,
    pub true_density: Vec<f64>,
    pub evaluation: EvaluationSet,
}

impl LabeledSample {
    /// `index,true_S,true_density,in_evaluation_mask`, one row per point.
    pub fn labels_csv(&self) -> String {
        let mask = self.evaluation.to_mask(self.n_points());
        let mut s = String::from("index,true_S,true_density,in_evaluation_mask\n");
        for i in 0..self.n_points() {
            s.push_str(&format!(
                "{i},{},{},{}\n",
                self.true_curvature[i],
                self.true_density[i],
                u8::from(mask[i])
            ));
        }
        s
    }

    pub fn save_labels(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.labels_csv()).map_err(|e| Error::io(path, e))
    }
}

impl Labels {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, f64, f64, bool)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
                continue;
            }
            let bad = |message: String| Error::Parse { line: lineno + 1, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", fields.len())));
            }
            let index = fields[0].parse().map_err(|e| bad(format!("index: {e}")))?;
            let s = fields[1].parse().map_err(|e| bad(format!("true_S: {e}")))?;
            let rho = fields[2].parse().map_err(|e| bad(format!("true_density: {e}")))?;
            let mask = match fields[3] {
                "1" | "true" => true,
                "0" | "false" => false,
                other => return Err(bad(format!("mask flag {other:?}"))),
            };
            rows.push((index, s, rho, mask));
        }
        if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(Error::Format("label indices must be 0..N in order".into()));
        }
        let mask: Vec<bool> = rows.iter().map(|r| r.3).collect();
        Ok(Labels {
            true_curvature: rows.iter().map(|r| r.1).collect(),
            true_density: rows.iter().map(|r| r.2).collect(),
            evaluation: EvaluationSet::from_mask(&mask),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.true_curvature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_curvature.is_empty()
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_count(count: usize) -> Result<()> {
    if count < 2 {
        return Err(Error::InvalidParameter(format!(
            "sample size must be at least 2, got {count}"
        )));
    }
    Ok(())
}

/// Volume of the unit n-sphere `S^n ⊂ R^{n+1}`.
pub fn sphere_volume(n: usize) -> f64 {
    let a = (n + 1) as f64 / 2.0;
    2.0 * (a * PI.ln() - ln_gamma(a)).exp()
}

pub fn sphere_geodesic(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

pub fn poincare_distance(u: &[f64], v: &[f64]) -> f64 {
    let sq = |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>();
    let diff: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    if diff == 0.0 {
        return 0.0;
    }
    let arg = 1.0 + 2.0 * diff / ((1.0 - sq(u)) * (1.0 - sq(v)));
    arg.acosh()
}

/// Hyperbolic distance from the origin of the Poincaré disk.
pub fn poincare_radius(u: &[f64]) -> f64 {
    let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    2.0 * norm.atanh()
}

/// Scalar curvature of the torus at tube angle θ (outer equator at θ = 0).
pub fn torus_scalar_curvature(theta: f64, tube_radius: f64, center_radius: f64) -> f64 {
    2.0 * theta.cos() / (tube_radius * (center_radius + tube_radius * theta.cos()))
}

/// Scalar curvature of the hyperboloid `x²/4 + y²/4 − z² = 1` at height z.
pub fn hyperboloid_scalar_curvature(z: f64) -> f64 {
    let s = 1.0 + 5.0 * z * z;
    -2.0 / (s * s)
}

/// Surface area of the hyperboloid band `|z| ≤ h`.
pub fn hyperboloid_area(h: f64) -> f64 {
    let s5 = 5f64.sqrt();
    let half = 0.5 * h * (1.0 + 5.0 * h * h).sqrt() + (s5 * h).asinh() / (2.0 * s5);
    // dA = 2·sqrt(1 + 5u²) du dθ
    2.0 * PI * 2.0 * 2.0 * half
}

/// Uniform sample on the unit sphere `S^n`.
pub fn sample_sphere(n: usize, count: usize, seed: u64) -> Result<LabeledSample> {
    if n < 1 {
        return Err(Error::InvalidParameter("sphere dimension must be at least 1".into()));
    }
    check_count(count)?;
    let mut rng = rng_for(seed);
    let dim = n + 1;
    let mut coords = Vec::with_capacity(count * dim);
    for _ in 0..count {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-12 {
                coords.extend(v.iter().map(|c| c / norm));
                break;
            }
        }
    }
    let s = (n * (n - 1)) as f64;
    Ok(LabeledSample {
        tag: ManifoldTag::Sphere { dim: n },
        cloud: PointCloud::new(dim, coords)?,
        embedded: true,
        exact: Some(ExactGeometry::Sphere),
        true_curvature: vec![s; count],
        true_density: vec![1.0 / sphere_volume(n); count],
        evaluation: EvaluationSet::all(count),
        chart: None,
        noise_sigma: 0.0,
    })
}

/// Uniform sample in a flat disk; curvature is evaluated inside radius 1.
pub fn sample_euclidean_disk(radius: f64, count: usize, seed: u64) -> Result<LabeledSample> {
    check_count(count)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("disk radius must be positive".into()));
    }
    let mut rng = rng_for(seed);
    let mut coords = Vec::with_capacity(2 * count);
    let mut mask = Vec::with_capacity(count);
    for _ in 0..count {
        let rho = radius * rng.random::<f64>().sqrt();
        let angle = 2.0 * PI * rng.random::<f64>();
        coords.push(rho * angle.cos());
        coords.push(rho * angle.sin());
        mask.push(rho <= 1.0);
    }
    Ok(LabeledSample {
        tag: ManifoldTag::EuclideanDisk { radius },
        cloud: PointCloud::new(2, coords)?,
        embedded: true,
        exact: Some(ExactGeometry::Euclidean),
        true_curvature: vec![0.0; count],
        true_density: vec![1.0 / (PI * radius * radius); count],
        evaluation: EvaluationSet::from_mask(&mask),
        chart: None,
        noise_sigma: 0.0,
    })
}

/// Hyperbolic-area-uniform sample of a hyperbolic disk, stored in the
/// Poincaré model. Curvature is evaluated inside hyperbolic radius 1.
pub fn sample_poincare_disk(hyperbolic_radius: f64, count: usize, seed: u64) -> Result<LabeledSample> {
    check_count(count)?;
    if !(hyperbolic_radius > 0.0) {
        return Err(Error::InvalidParameter("hyperbolic radius must be positive".into()));
    }
    let mut rng = rng_for(seed);
    let span = hyperbolic_radius.cosh() - 1.0;
    let mut coords = Vec::with_capacity(2 * count);
    let mut mask = Vec::with_capacity(count);
    for _ in 0..count {
        // inverse of the radial CDF (cosh ρ − 1) / (cosh R − 1)
        let rho = (1.0 + rng.random::<f64>() * span).acosh();
        let angle = 2.0 * PI * rng.random::<f64>();
        let t = (0.5 * rho).tanh();
        coords.push(t * angle.cos());
        coords.push(t * angle.sin());
        mask.push(rho <= 1.0);
    }
    let area = 2.0 * PI * span;
    Ok(LabeledSample {
        tag: ManifoldTag::PoincareDisk { hyperbolic_radius },
        cloud: PointCloud::new(2, coords)?,
        embedded: false,
        exact: Some(ExactGeometry::PoincareDisk),
        true_curvature: vec![-2.0; count],
        true_density: vec![1.0 / area; count],
        evaluation: EvaluationSet::from_mask(&mask),
        chart: None,
        noise_sigma: 0.0,
    })
}

/// Area-uniform sample of the torus of revolution with tube radius `r`
/// and center-circle radius `big_r`. No exact distances are provided.
pub fn sample_torus(r: f64, big_r: f64, count: usize, seed: u64) -> Result<LabeledSample> {
    check_count(count)?;
    if !(r > 0.0 && big_r > r) {
        return Err(Error::InvalidParameter(format!(
            "torus needs 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    let mut rng = rng_for(seed);
    let mut coords = Vec::with_capacity(3 * count);
    let mut thetas = Vec::with_capacity(count);
    while thetas.len() < count {
        let theta = 2.0 * PI * rng.random::<f64>();
        let accept = (big_r + r * theta.cos()) / (big_r + r);
        if rng.random::<f64>() >= accept {
            continue;
        }
        let phi = 2.0 * PI * rng.random::<f64>();
        let ring = big_r + r * theta.cos();
        coords.push(ring * phi.cos());
        coords.push(ring * phi.sin());
        coords.push(r * theta.sin());
        thetas.push(theta);
    }
    let true_curvature = thetas
        .iter()
        .map(|&t| torus_scalar_curvature(t, r, big_r))
        .collect();
    Ok(LabeledSample {
        tag: ManifoldTag::Torus {
            tube_radius: r,
            center_radius: big_r,
        },
        cloud: PointCloud::new(3, coords)?,
        embedded: true,
        exact: None,
        true_curvature,
        true_density: vec![1.0 / (4.0 * PI * PI * r * big_r); count],
        evaluation: EvaluationSet::all(count),
        chart: Some(thetas),
        noise_sigma: 0.0,
    })
}

/// Area-uniform sample of the one-sheet hyperboloid band `|z| ≤ 2`, drawn
/// until `count` points fall in `|z| ≤ 1` (the evaluation set).
pub fn sample_hyperboloid(count: usize, seed: u64) -> Result<LabeledSample> {
    check_count(count)?;
    let mut rng = rng_for(seed);
    let max_density = 21f64.sqrt();
    let mut coords = Vec::new();
    let mut heights = Vec::new();
    let mut inner = 0usize;
    while inner < count {
        let u = rng.random_range(-2.0..=2.0f64);
        if rng.random::<f64>() * max_density >= (1.0 + 5.0 * u * u).sqrt() {
            continue;
        }
        let theta = 2.0 * PI * rng.random::<f64>();
        let w = 2.0 * (1.0 + u * u).sqrt();
        coords.extend_from_slice(&[w * theta.cos(), w * theta.sin(), u]);
        heights.push(u);
        if u.abs() <= 1.0 {
            inner += 1;
        }
    }
    let total = heights.len();
    let mask: Vec<bool> = heights.iter().map(|z| z.abs() <= 1.0).collect();
    Ok(LabeledSample {
        tag: ManifoldTag::Hyperboloid,
        cloud: PointCloud::new(3, coords)?,
        embedded: true,
        exact: None,
        true_curvature: heights.iter().map(|&z| hyperboloid_scalar_curvature(z)).collect(),
        true_density: vec![1.0 / hyperboloid_area(2.0); total],
        evaluation: EvaluationSet::from_mask(&mask),
        chart: Some(heights),
        noise_sigma: 0.0,
    })
}

/// Draws `count` points from the manifold described by `tag`.
///
/// For the hyperboloid, `count` is the target size of the `|z| ≤ 1`
/// evaluation set and the total sample is larger.
pub fn sample(tag: ManifoldTag, count: usize, seed: u64) -> Result<LabeledSample> {
    match tag {
        ManifoldTag::Sphere { dim } => sample_sphere(dim, count, seed),
        ManifoldTag::EuclideanDisk { radius } => sample_euclidean_disk(radius, count, seed),
        ManifoldTag::PoincareDisk { hyperbolic_radius } => {
            sample_poincare_disk(hyperbolic_radius, count, seed)
        }
        ManifoldTag::Torus {
            tube_radius,
            center_radius,
        } => sample_torus(tube_radius, center_radius, count, seed),
        ManifoldTag::Hyperboloid => sample_hyperboloid(count, seed),
    }
}

/// Adds i.i.d. Gaussian noise to every ambient coordinate. Exact distances
/// are dropped; ground-truth labels are kept for scoring.
pub fn add_noise(sample: &LabeledSample, spec: NoiseSpec) -> Result<LabeledSample> {
    if !sample.embedded {
        return Err(Error::NotEmbedded(format!(
            "{:?} has no ambient coordinates to perturb",
            sample.tag
        )));
    }
    if !(spec.sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be nonnegative, got {}",
            spec.sigma
        )));
    }
    let mut out = sample.clone();
    if spec.sigma > 0.0 {
        let normal = Normal::new(0.0, spec.sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = rng_for(spec.seed);
        for c in out.cloud.coords_mut() {
            *c += normal.sample(&mut rng);
        }
        out.exact = None;
    }
    out.noise_sigma = spec.sigma;
    Ok(out)
}
