use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{
    estimate_ball_volume, fit_quadratic_coefficient, ratio_sequence, scalar_from_coefficient,
    unit_ball_volume, Neighborhood, RadiusSchedule, RatioPoint,
};
use crate::graph::{build_knn_graph, shortest_path_distances, WeightedGraph};
use crate::intrinsic::{levina_bickel, DensityField};
use crate::metric::{CloudMetric, DistanceMatrix, PointCloud};
use crate::oracles;
use crate::samplers::{sample_sphere, sphere_geodesic};

use super::config::{DataSpec, ExperimentConfig};
use super::presets::{preset, DEFAULT_COUNT, DEFAULT_SEED, NOISE_LEVELS};
use super::run::{run_experiment, ExperimentResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Criterion {
    ExactSurfaces,
    GraphSurfaces,
    HigherSpheres,
    NonconstantSurfaces,
    NoisySphere,
    Unbiasedness,
    MseScaling,
    OracleEquivalence,
    Dimension,
    Invariants,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::ExactSurfaces,
        Criterion::GraphSurfaces,
        Criterion::HigherSpheres,
        Criterion::NonconstantSurfaces,
        Criterion::NoisySphere,
        Criterion::Unbiasedness,
        Criterion::MseScaling,
        Criterion::OracleEquivalence,
        Criterion::Dimension,
        Criterion::Invariants,
    ];

    pub fn id(self) -> u8 {
        Criterion::ALL.iter().position(|&c| c == self).unwrap() as u8 + 1
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Criterion::ALL.get((id as usize).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::ExactSurfaces => "constant-curvature surfaces, exact geodesics",
            Criterion::GraphSurfaces => "constant-curvature surfaces, graph geodesics",
            Criterion::HigherSpheres => "higher-dimensional spheres",
            Criterion::NonconstantSurfaces => "torus and hyperboloid",
            Criterion::NoisySphere => "noisy 2-sphere",
            Criterion::Unbiasedness => "ball-volume unbiasedness",
            Criterion::MseScaling => "ball-ratio variance scaling",
            Criterion::OracleEquivalence => "fast paths match oracles",
            Criterion::Dimension => "dimension estimation",
            Criterion::Invariants => "exact-arithmetic invariants",
        }
    }
}

/// One measured quantity and whether it met its target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, value: f64, target: impl Into<String>, passed: bool) -> Self {
        Check {
            label: label.into(),
            value,
            target: target.into(),
            passed,
        }
    }

    fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(label, value, format!("<= {limit}"), value <= limit)
    }

    fn at_least(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(label, value, format!(">= {limit}"), value >= limit)
    }

    fn within(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check::new(
            label,
            value,
            format!("{target} ± {}", (tol * 1e9).round() / 1e9),
            (value - target).abs() <= tol,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Set when a stage failed before the criterion could be measured.
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionResult {
    fn from_checks(criterion: Criterion, checks: Vec<Check>, seconds: f64) -> Self {
        CriterionResult {
            id: criterion.id(),
            name: criterion.name(),
            passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
            checks,
            error: None,
            seconds,
        }
    }

    fn failed(criterion: Criterion, error: String, seconds: f64) -> Self {
        CriterionResult {
            id: criterion.id(),
            name: criterion.name(),
            passed: false,
            checks: Vec::new(),
            error: Some(error),
            seconds,
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds
        )?;
        if let Some(e) = &self.error {
            write!(f, ": error: {e}")?;
        }
        for c in &self.checks {
            write!(
                f,
                "\n       {} {} = {:.4} (target {})",
                if c.passed { "ok  " } else { "MISS" },
                c.label,
                c.value,
                c.target
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub results: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn get(&self, criterion: Criterion) -> Option<&CriterionResult> {
        self.results.iter().find(|r| r.id == criterion.id())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for AcceptanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceOptions {
    pub count: usize,
    pub seed: u64,
    /// Print each criterion result to stderr as soon as it is known.
    pub verbose: bool,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            count: DEFAULT_COUNT,
            seed: DEFAULT_SEED,
            verbose: false,
        }
    }
}

/// Preset runs shared between criteria, computed on first use.
struct Runs<'a> {
    opts: &'a AcceptanceOptions,
    cache: BTreeMap<&'static str, Result<ExperimentResult, String>>,
}

impl<'a> Runs<'a> {
    fn config(&self, name: &str) -> crate::Result<ExperimentConfig> {
        let mut cfg = preset(name, Some(self.opts.count))?;
        if let DataSpec::Synthetic { seed, noise, .. } = &mut cfg.data {
            *seed = self.opts.seed;
            if let Some(n) = noise {
                n.seed = self.opts.seed.wrapping_add(1);
            }
        }
        Ok(cfg)
    }

    fn get(&mut self, name: &'static str) -> Result<&ExperimentResult, String> {
        if !self.cache.contains_key(name) {
            let result = self
                .config(name)
                .and_then(|cfg| run_experiment(&cfg))
                .map_err(|e| format!("{name}: {e}"));
            if let Ok(r) = &result {
                log::info!("{name}: {:.1}s, median S_hat {:.3}", r.total_seconds, r.summary.median);
            }
            self.cache.insert(name, result);
        }
        self.cache[name].as_ref().map_err(|e| e.clone())
    }

    fn all(&mut self, names: &[&'static str]) -> Result<Vec<&ExperimentResult>, String> {
        for n in names {
            self.get(n)?;
        }
        Ok(names
            .iter()
            .map(|n| self.cache[n].as_ref().unwrap())
            .collect())
    }
}

/// Median of `Ŝ` within `tol` of `target`.
pub fn check_median(result: &ExperimentResult, target: f64, tol: f64) -> Check {
    Check::within(format!("{} median S_hat", result.name), result.summary.median, target, tol)
}

fn check_runtime(result: &ExperimentResult, limit: f64) -> Check {
    Check::new(
        format!("{} runtime s", result.name),
        result.total_seconds,
        format!("< {limit}"),
        result.total_seconds < limit,
    )
}

/// Median and runtime checks for the constant-curvature surfaces.
pub fn score_surfaces(results: &[(&ExperimentResult, f64, f64)], time_limit: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    for &(r, target, tol) in results {
        checks.push(check_median(r, target, tol));
        checks.push(check_runtime(r, time_limit));
    }
    checks
}

fn exact_surfaces(runs: &mut Runs) -> Result<Vec<Check>, String> {
    let r = runs.all(&["sphere2-exact", "euclidean-disk-exact", "poincare-disk"])?;
    Ok(score_surfaces(&[(r[0], 2.0, 0.5), (r[1], 0.0, 0.5), (r[2], -2.0, 0.75)], 180.0))
}

fn graph_surfaces(runs: &mut Runs) -> Result<Vec<Check>, String> {
    let r = runs.all(&["sphere2-graph", "euclidean-disk-graph"])?;
    Ok(score_surfaces(&[(r[0], 2.0, 0.75), (r[1], 0.0, 0.75)], 300.0))
}

fn higher_spheres(runs: &mut Runs) -> Result<Vec<Check>, String> {
    let r = runs.all(&["sphere3-exact", "sphere5-exact", "sphere7-exact"])?;
    Ok(vec![
        Check::within("sphere3-exact median S_hat", r[0].summary.median, 6.0, 0.35 * 6.0),
        Check::at_least("sphere3-exact fraction positive", r[0].summary.fraction_positive, 0.95),
        Check::at_least("sphere5-exact fraction positive", r[1].summary.fraction_positive, 0.90),
        Check::at_least("sphere7-exact fraction positive", r[2].summary.fraction_positive, 0.90),
    ])
}

fn nonconstant(runs: &mut Runs) -> Result<Vec<Check>, String> {
    let r = runs.all(&["torus", "hyperboloid"])?;
    let torus = &r[0].summary;
    Ok(vec![
        Check::at_least("torus sign accuracy", torus.sign_accuracy.unwrap_or(f64::NAN), 0.8),
        Check::at_least("torus Pearson r", torus.pearson.unwrap_or(f64::NAN), 0.6),
        Check::at_least("hyperboloid fraction negative", r[1].summary.fraction_negative, 0.8),
    ])
}

const NOISE_PRESETS: [&str; 4] = [
    "sphere2-noise-0.001",
    "sphere2-noise-0.003",
    "sphere2-noise-0.01",
    "sphere2-noise-0.03",
];

fn noisy_sphere(runs: &mut Runs) -> Result<Vec<Check>, String> {
    debug_assert_eq!(NOISE_PRESETS.len(), NOISE_LEVELS.len());
    let r = runs.all(&NOISE_PRESETS)?;
    Ok(r.iter()
        .map(|res| {
            Check::new(
                format!("{} mean S_hat", res.name),
                res.summary.mean,
                "> 0",
                res.summary.mean > 0.0,
            )
        })
        .collect())
}

fn north_pole_sphere(count: usize, seed: u64) -> crate::Result<PointCloud> {
    let mut s = sample_sphere(2, count, seed)?;
    let c = s.cloud.coords_mut();
    c[..3].copy_from_slice(&[0.0, 0.0, 1.0]);
    Ok(s.cloud)
}

/// Ball-volume estimates at a fixed center with the true uniform density.
fn oracle_volumes(count: usize, seed: u64, radii: &[f64]) -> crate::Result<Vec<f64>> {
    let cloud = north_pole_sphere(count, seed)?;
    let d = CloudMetric::new(&cloud, sphere_geodesic);
    let field = DensityField::oracle(vec![1.0 / (4.0 * PI); count], 2)?;
    radii
        .iter()
        .map(|&r| estimate_ball_volume(&d, &field, 0, r).map(|e| e.volume))
        .collect()
}

fn mean_and_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn unbiasedness(seed: u64) -> Result<Vec<Check>, String> {
    let start = Instant::now();
    let r = 0.5;
    let volumes: Vec<f64> = (0..2000u64)
        .into_par_iter()
        .map(|i| oracle_volumes(500, seed.wrapping_add(10_000 + i), &[r]).map(|v| v[0]))
        .collect::<crate::Result<_>>()
        .map_err(|e| e.to_string())?;
    let (mean, var) = mean_and_var(&volumes);
    let se = (var / volumes.len() as f64).sqrt();
    let cap = 2.0 * PI * (1.0 - r.cos());
    let z = (mean - cap) / se;
    Ok(vec![
        Check::new("MC mean v_hat", mean, format!("{cap:.6} ± 3 SE ({:.6})", 3.0 * se), z.abs() <= 3.0),
        Check::at_most("|z| of MC mean", z.abs(), 3.0),
        Check::new("runtime s", start.elapsed().as_secs_f64(), "< 60", start.elapsed().as_secs_f64() < 60.0),
    ])
}

fn mse_scaling(seed: u64) -> Result<Vec<Check>, String> {
    let radii = [0.2, 0.4, 0.8];
    let mut checks = Vec::new();
    let mut scaled = Vec::new();
    for &n in &[1000usize, 4000] {
        let per_rep: Vec<Vec<f64>> = (0..200u64)
            .into_par_iter()
            .map(|i| oracle_volumes(n, seed.wrapping_add(20_000 + 1000 * n as u64 + i), &radii))
            .collect::<crate::Result<_>>()
            .map_err(|e| e.to_string())?;
        for (k, &r) in radii.iter().enumerate() {
            let y: Vec<f64> = per_rep.iter().map(|v| v[k] / (unit_ball_volume(2) * r * r)).collect();
            let (_, var) = mean_and_var(&y);
            let s = var * n as f64 * r * r;
            checks.push(Check::new(format!("var(y)·N·r² at N={n}, r={r}"), s, "finite", s.is_finite() && s > 0.0));
            scaled.push(s);
        }
    }
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::at_most("max/min of var(y)·N·r²", max / min, 4.0));
    Ok(checks)
}

/// Connected graph with integer weights: a random spanning tree plus extra edges.
fn random_integer_graph(n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((i, rng.random_range(0..i), rng.random_range(1..=20) as f64));
    }
    let extra = rng.random_range(n..4 * n);
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
            edges.push((a, b, rng.random_range(1..=20) as f64));
        }
    }
    WeightedGraph::from_edges(n, &edges).expect("valid random graph")
}

fn random_instance(rng: &mut ChaCha8Rng) -> (DistanceMatrix, DensityField, usize) {
    let n = rng.random_range(10..150);
    let dim = rng.random_range(1..4);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    let cloud = PointCloud::new(dim, coords).unwrap();
    let d = CloudMetric::euclidean(&cloud).to_matrix().unwrap();
    let field = DensityField::oracle((0..n).map(|_| rng.random_range(0.1..5.0)).collect(), dim).unwrap();
    (d, field, dim)
}

fn oracle_equivalence(seed: u64) -> Result<Vec<Check>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0e11_a5e5);

    let mut graph_mismatches = 0usize;
    for _ in 0..50 {
        let g = random_integer_graph(50, &mut rng);
        let fast = shortest_path_distances(&g).map_err(|e| e.to_string())?;
        let slow = oracles::floyd_warshall(&g);
        for i in 0..50 {
            for j in 0..50 {
                if fast.get(i, j) != slow[i][j] {
                    graph_mismatches += 1;
                }
            }
        }
    }

    let mut ratio_mismatches = 0usize;
    for t in 0..100 {
        let (d, field, dim) = random_instance(&mut rng);
        let x = rng.random_range(0..d.n_points());
        let nb = Neighborhood::of(&d, x).map_err(|e| e.to_string())?;
        let far = nb.farthest();
        let schedule = if t % 2 == 0 {
            RadiusSchedule::nearest_neighbor(&nb, 0.0, far * rng.random_range(0.3..1.2))
        } else {
            let step = far / rng.random_range(3..40) as f64;
            RadiusSchedule::from_radii(0.0, (1..=40).map(|i| i as f64 * step).collect())
        }
        .map_err(|e| e.to_string())?;
        let fast = ratio_sequence(&d, &field, x, &schedule, dim).map_err(|e| e.to_string())?;
        let slow = oracles::ratio_sequence_direct(&d, &field, x, &schedule, dim);
        let same = fast.len() == slow.len()
            && fast
                .iter()
                .zip(&slow)
                .all(|(a, b)| a.radius.to_bits() == b.radius.to_bits() && a.ratio.to_bits() == b.ratio.to_bits());
        if !same {
            ratio_mismatches += 1;
        }
    }

    let mut worst_rel = 0.0f64;
    for _ in 0..100 {
        let (d, field, _) = random_instance(&mut rng);
        let x = rng.random_range(0..d.n_points());
        let r = rng.random_range(0.05..1.0);
        let eq5 = estimate_ball_volume(&d, &field, x, r).map_err(|e| e.to_string())?.volume;
        let eq6 = oracles::ball_volume_inverse_sum(&d, &field, x, r);
        let rel = if eq6 == 0.0 { (eq5 - eq6).abs() } else { ((eq5 - eq6) / eq6).abs() };
        worst_rel = worst_rel.max(rel);
    }

    Ok(vec![
        Check::at_most("Dijkstra vs Floyd-Warshall mismatched entries", graph_mismatches as f64, 0.0),
        Check::at_most("incremental vs direct ratio mismatches", ratio_mismatches as f64, 0.0),
        Check::at_most("ball-volume forms, worst relative gap", worst_rel, 1e-12),
    ])
}

const DIMENSION_PRESETS: [(&str, usize); 17] = [
    ("sphere2-exact", 2),
    ("sphere2-graph", 2),
    ("euclidean-disk-exact", 2),
    ("euclidean-disk-graph", 2),
    ("poincare-disk", 2),
    ("sphere2-noise-0.001", 2),
    ("sphere2-noise-0.003", 2),
    ("sphere2-noise-0.01", 2),
    ("sphere2-noise-0.03", 2),
    ("sphere3-exact", 3),
    ("sphere3-graph", 3),
    ("sphere5-exact", 5),
    ("sphere5-graph", 5),
    ("sphere7-exact", 7),
    ("sphere7-graph", 7),
    ("torus", 2),
    ("hyperboloid", 2),
];

fn dimension(runs: &mut Runs) -> Result<Vec<Check>, String> {
    let mut checks = Vec::new();
    for &(name, n) in &DIMENSION_PRESETS {
        let r = runs.get(name)?;
        let wrong = r.n_hat_sweep.iter().filter(|(_, est)| *est != n).count();
        let (lo, hi) = r
            .dimension
            .as_ref()
            .map(|d| {
                let band = &d.raw_values[30 - d.k1..];
                (
                    band.iter().copied().fold(f64::INFINITY, f64::min),
                    band.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            })
            .unwrap_or((f64::NAN, f64::NAN));
        checks.push(Check::new(
            format!("{name} k2 values with n_hat != {n} (raw {lo:.3}..{hi:.3})"),
            wrong as f64,
            "0",
            wrong == 0 && r.n_hat_sweep.len() == 71,
        ));
    }
    Ok(checks)
}

fn invariants(runs: &Runs, seed: u64) -> Result<Vec<Check>, String> {
    let mut reports = 0usize;
    let mut identity_failures = 0usize;
    for r in runs.cache.values().flatten() {
        for rep in &r.reports {
            reports += 1;
            let expected = -6.0 * (rep.n_hat as f64 + 2.0) * rep.c_hat;
            if rep.s_hat.to_bits() != expected.to_bits()
                || rep.s_hat.to_bits() != scalar_from_coefficient(rep.c_hat, rep.n_hat).to_bits()
            {
                identity_failures += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7a);
    let mut s_rng_failures = 0usize;
    for _ in 0..1000 {
        let c: f64 = rng.random_range(-10.0..10.0);
        let n = rng.random_range(1..12);
        reports += 1;
        if scalar_from_coefficient(c, n) != -6.0 * (n as f64 + 2.0) * c {
            s_rng_failures += 1;
        }
    }

    let mut worst_flat = 0.0f64;
    for _ in 0..200 {
        let m = rng.random_range(1..60);
        let r_min = rng.random_range(0.0..0.5);
        let mut radii: Vec<f64> = (0..m).map(|_| r_min + rng.random_range(1e-3..3.0)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let schedule = RadiusSchedule::from_radii(r_min, radii.clone()).map_err(|e| e.to_string())?;
        let ones: Vec<RatioPoint> = radii.iter().map(|&radius| RatioPoint { radius, ratio: 1.0 }).collect();
        let c = fit_quadratic_coefficient(&ones, &schedule).map_err(|e| e.to_string())?;
        worst_flat = worst_flat.max(c.abs());
    }

    let sphere = sample_sphere(2, 1500, seed.wrapping_add(7)).map_err(|e| e.to_string())?;
    let d = sphere
        .exact_distances()
        .expect("sphere has exact distances")
        .map_err(|e| e.to_string())?;
    let a = levina_bickel(&d, 20, 100).map_err(|e| e.to_string())?;
    let b = levina_bickel(&d.scaled(2.0).map_err(|e| e.to_string())?, 20, 100).map_err(|e| e.to_string())?;
    let worst_dim = a
        .raw_values
        .iter()
        .zip(&b.raw_values)
        .map(|(x, y)| ((x - y) / x).abs())
        .fold(0.0, f64::max);
    let graph = build_knn_graph(&d, 15).map_err(|e| e.to_string())?;
    let g = shortest_path_distances(&graph).map_err(|e| e.to_string())?;
    let ga = levina_bickel(&g, 20, 100).map_err(|e| e.to_string())?;
    let gb = levina_bickel(&g.scaled(2.0).map_err(|e| e.to_string())?, 20, 100).map_err(|e| e.to_string())?;

    Ok(vec![
        Check::new(
            format!("S_hat != -6(n_hat+2)C_hat over {reports} reports"),
            (identity_failures + s_rng_failures) as f64,
            "0",
            identity_failures + s_rng_failures == 0,
        ),
        Check::at_most("|C_hat| for unit ratios", worst_flat, 0.0),
        Check::new(
            "n_hat unchanged under d -> 2d",
            (a.n_hat == b.n_hat && ga.n_hat == gb.n_hat) as u8 as f64,
            "1",
            a.n_hat == b.n_hat && ga.n_hat == gb.n_hat,
        ),
        Check::at_most("raw dimension relative change under d -> 2d", worst_dim, 1e-12),
    ])
}

/// Runs the selected criteria; failures are recorded, never raised.
pub fn acceptance_suite(criteria: &[Criterion], opts: &AcceptanceOptions) -> AcceptanceReport {
    let mut runs = Runs {
        opts,
        cache: BTreeMap::new(),
    };
    let mut ordered = criteria.to_vec();
    ordered.sort();
    ordered.dedup();
    // invariants are checked against every run made by the other criteria
    if let Some(pos) = ordered.iter().position(|&c| c == Criterion::Invariants) {
        let c = ordered.remove(pos);
        ordered.push(c);
    }
    let mut results = Vec::new();
    for c in ordered {
        let start = Instant::now();
        let outcome = match c {
            Criterion::ExactSurfaces => exact_surfaces(&mut runs),
            Criterion::GraphSurfaces => graph_surfaces(&mut runs),
            Criterion::HigherSpheres => higher_spheres(&mut runs),
            Criterion::NonconstantSurfaces => nonconstant(&mut runs),
            Criterion::NoisySphere => noisy_sphere(&mut runs),
            Criterion::Unbiasedness => unbiasedness(opts.seed),
            Criterion::MseScaling => mse_scaling(opts.seed),
            Criterion::OracleEquivalence => oracle_equivalence(opts.seed),
            Criterion::Dimension => dimension(&mut runs),
            Criterion::Invariants => invariants(&runs, opts.seed),
        };
        let seconds = start.elapsed().as_secs_f64();
        let result = match outcome {
            Ok(checks) => CriterionResult::from_checks(c, checks, seconds),
            Err(e) => CriterionResult::failed(c, e, seconds),
        };
        if opts.verbose {
            eprintln!("{result}");
        }
        results.push(result);
    }
    AcceptanceReport { results }
}
