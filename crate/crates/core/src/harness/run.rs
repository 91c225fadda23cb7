use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::curvature::{CurvatureEstimator, CurvatureReport};
use crate::error::{Error, Result};
use crate::graph::{build_knn_graph, load_graph, shortest_path_distances};
use crate::intrinsic::{default_bandwidth, kde_density, levina_bickel, DensityField, DimensionEstimate, DistanceSource};
use crate::metric::{load_distance_matrix, CloudMetric, DistanceMatrix, EvaluationSet, MatrixFormat, Metric, PointCloud};
use crate::samplers::{add_noise, sample, LabeledSample};

use super::config::{Bandwidth, DataSpec, DensityDistances, DistanceMethod, ExperimentConfig};
use super::histogram::emit_histogram;

/// Points with `|true S|` below this are left out of sign accuracy.
pub const SIGN_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

/// Statistics of `Ŝ` over the evaluated points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub n_evaluated: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub fraction_positive: f64,
    pub fraction_negative: f64,
    /// Share of points with `|true S| ≥ SIGN_THRESHOLD` whose sign is right.
    pub sign_accuracy: Option<f64>,
    pub sign_points: usize,
    pub pearson: Option<f64>,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

impl Summary {
    pub fn from_reports(reports: &[CurvatureReport]) -> Self {
        let s: Vec<f64> = reports.iter().map(|r| r.s_hat).collect();
        let n = s.len();
        let nf = n as f64;
        let mean = s.iter().sum::<f64>() / nf;
        let var = if n > 1 {
            s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        let signed: Vec<(f64, f64)> = reports
            .iter()
            .filter_map(|r| r.true_s.map(|t| (r.s_hat, t)))
            .filter(|(_, t)| t.abs() >= SIGN_THRESHOLD)
            .collect();
        let sign_accuracy = if signed.is_empty() {
            None
        } else {
            let hits = signed.iter().filter(|(e, t)| e.signum() == t.signum() && *e != 0.0).count();
            Some(hits as f64 / signed.len() as f64)
        };
        let (est, truth): (Vec<f64>, Vec<f64>) = reports
            .iter()
            .filter_map(|r| r.true_s.map(|t| (r.s_hat, t)))
            .unzip();
        Summary {
            n_evaluated: n,
            mean,
            median: median(&s),
            std: var.sqrt(),
            min: s.iter().copied().fold(f64::INFINITY, f64::min),
            max: s.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            fraction_positive: s.iter().filter(|v| **v > 0.0).count() as f64 / nf,
            fraction_negative: s.iter().filter(|v| **v < 0.0).count() as f64 / nf,
            sign_accuracy,
            sign_points: signed.len(),
            pearson: pearson(&est, &truth),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub seed: Option<u64>,
    pub n_points: usize,
    pub n_hat: usize,
    /// Present unless the dimension was fixed by the config.
    pub dimension: Option<DimensionEstimate>,
    /// `(k2, n̂)` for every k2 in the configured sweep.
    pub n_hat_sweep: Vec<(usize, usize)>,
    pub bandwidth: Option<f64>,
    pub summary: Summary,
    pub timings: Vec<StageTiming>,
    pub total_seconds: f64,
    #[serde(skip)]
    pub reports: Vec<CurvatureReport>,
    /// Chart coordinate of each evaluated point, when the manifold has one.
    #[serde(skip)]
    pub chart: Option<Vec<f64>>,
}

impl ExperimentResult {
    pub fn stage_seconds(&self) -> f64 {
        self.timings.iter().map(|t| t.seconds).sum()
    }

    pub fn reports_csv(&self) -> String {
        let mut s = String::from("point_index,n_hat,C_hat,S_hat,true_S\n");
        for r in &self.reports {
            let truth = r.true_s.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{}", r.index, r.n_hat, r.c_hat, r.s_hat, truth);
        }
        s
    }

    pub fn ratios_csv(&self) -> String {
        let mut s = String::from("point_index,radius,ratio\n");
        for r in &self.reports {
            for p in &r.ratios {
                let _ = writeln!(s, "{},{},{}", r.index, p.radius, p.ratio);
            }
        }
        s
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

struct Timer {
    stages: Vec<StageTiming>,
    last: Instant,
}

impl Timer {
    fn new() -> Self {
        Timer {
            stages: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &'static str) {
        let now = Instant::now();
        self.stages.push(StageTiming {
            stage,
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

struct Loaded {
    sample: Option<LabeledSample>,
    cloud: Option<PointCloud>,
    distances: Option<DistanceMatrix>,
}

fn load_data(config: &ExperimentConfig) -> Result<Loaded> {
    Ok(match &config.data {
        DataSpec::Synthetic {
            manifold,
            count,
            seed,
            noise,
        } => {
            let mut s = sample(*manifold, *count, *seed)?;
            if let Some(spec) = noise {
                s = add_noise(&s, *spec)?;
            }
            Loaded {
                sample: Some(s),
                cloud: None,
                distances: None,
            }
        }
        DataSpec::PointCloud { path } => Loaded {
            sample: None,
            cloud: Some(PointCloud::load_csv(path)?),
            distances: None,
        },
        DataSpec::DistanceMatrix { path, format } => {
            let format = format.map(MatrixFormat::from).unwrap_or_else(|| MatrixFormat::from_path(path));
            Loaded {
                sample: None,
                cloud: None,
                distances: Some(load_distance_matrix(path, format)?),
            }
        }
        DataSpec::EdgeList { path } => Loaded {
            sample: None,
            cloud: None,
            distances: Some(shortest_path_distances(&load_graph(path)?)?),
        },
    })
}

fn embedded_cloud(loaded: &Loaded) -> Result<&PointCloud> {
    match (&loaded.sample, &loaded.cloud) {
        (Some(s), _) if !s.embedded => Err(Error::NotEmbedded(format!(
            "{:?} sample has no ambient embedding",
            s.tag
        ))),
        (Some(s), _) => Ok(&s.cloud),
        (None, Some(c)) => Ok(c),
        (None, None) => Err(Error::NotEmbedded("input has no point coordinates".into())),
    }
}

fn geodesic_distances(config: &ExperimentConfig, loaded: &mut Loaded) -> Result<DistanceMatrix> {
    match config.distances {
        DistanceMethod::Exact => {
            let s = loaded
                .sample
                .as_ref()
                .ok_or_else(|| Error::Config("exact geodesics need a synthetic manifold".into()))?;
            s.exact_distances().unwrap_or_else(|| {
                Err(Error::Config(
                    "exact geodesics are undefined for this sample; use graph distances".into(),
                ))
            })
        }
        DistanceMethod::Graph { k } => {
            let cloud = embedded_cloud(loaded)?;
            let g = build_knn_graph(&CloudMetric::euclidean(cloud), k)?;
            shortest_path_distances(&g)
        }
        DistanceMethod::Given => loaded
            .distances
            .take()
            .ok_or_else(|| Error::Config("no distances were given".into())),
    }
}

fn density_field(
    config: &ExperimentConfig,
    loaded: &Loaded,
    d: &DistanceMatrix,
    n_hat: usize,
) -> Result<(DensityField, Option<f64>)> {
    let kde = |m: &dyn Metric, source| -> Result<(DensityField, Option<f64>)> {
        let h = match config.density.bandwidth {
            Bandwidth::Auto => default_bandwidth(m, n_hat)?,
            Bandwidth::Fixed(h) => h,
        };
        let field = kde_density(m, n_hat, config.density.kernel, h)?.with_distance_source(source);
        Ok((field, Some(h)))
    };
    match config.density.distances {
        DensityDistances::Geodesic => {
            let source = match config.distances {
                DistanceMethod::Exact => DistanceSource::Exact,
                _ => DistanceSource::Graph,
            };
            kde(d, source)
        }
        DensityDistances::Euclidean => {
            let cloud = embedded_cloud(loaded)?;
            kde(&CloudMetric::euclidean(cloud), DistanceSource::Euclidean)
        }
        DensityDistances::Oracle => {
            let s = loaded
                .sample
                .as_ref()
                .ok_or_else(|| Error::Config("oracle density needs a synthetic manifold".into()))?;
            Ok((DensityField::oracle(s.true_density.clone(), n_hat)?, None))
        }
    }
}

fn evaluation_set(config: &ExperimentConfig, loaded: &Loaded, n: usize) -> Result<EvaluationSet> {
    if let Some(path) = &config.evaluation {
        return EvaluationSet::load(path, n);
    }
    Ok(loaded
        .sample
        .as_ref()
        .map(|s| s.evaluation.clone())
        .unwrap_or_else(|| EvaluationSet::all(n)))
}

/// `(n̂, estimate, (k2, n̂) sweep)`.
type DimensionOutcome = (usize, Option<DimensionEstimate>, Vec<(usize, usize)>);

fn estimate_dimension(config: &ExperimentConfig, d: &DistanceMatrix) -> Result<DimensionOutcome> {
    if let Some(n) = config.dimension.fixed {
        return Ok((n, None, Vec::new()));
    }
    let dim = &config.dimension;
    let est = levina_bickel(d, dim.k1, dim.k2)?;
    let sweep = match dim.sweep_from {
        Some(from) => (from..=dim.k2)
            .map(|k2| est.truncated(k2).map(|e| (k2, e.n_hat)))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok((est.n_hat, Some(est), sweep))
}

/// Runs every stage of the pipeline; writes outputs when a directory is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let mut timer = Timer::new();

    let mut loaded = load_data(config).map_err(|e| e.in_stage("data"))?;
    timer.lap("data");

    let d = geodesic_distances(config, &mut loaded).map_err(|e| e.in_stage("distances"))?;
    let n = d.n_points();
    timer.lap("distances");

    let (n_hat, dimension, n_hat_sweep) = estimate_dimension(config, &d).map_err(|e| e.in_stage("dimension"))?;
    log::info!("{}: n_hat = {n_hat}", config.name);
    timer.lap("dimension");

    let (field, bandwidth) = density_field(config, &loaded, &d, n_hat).map_err(|e| e.in_stage("density"))?;
    timer.lap("density");

    let points = evaluation_set(config, &loaded, n).map_err(|e| e.in_stage("curvature"))?;
    let estimator = CurvatureEstimator {
        r_min: config.radii.r_min,
        r_max: config.radii.r_max,
        schedule: config.radii.schedule,
    };
    let mut reports = estimator
        .estimate(&d, &field, &points, n_hat)
        .map_err(|e| e.in_stage("curvature"))?;
    drop(d);
    let mut chart = None;
    if let Some(s) = &loaded.sample {
        for r in &mut reports {
            r.true_s = Some(s.true_curvature[r.index]);
        }
        chart = s
            .chart
            .as_ref()
            .map(|c| points.indices().iter().map(|&i| c[i]).collect());
    }
    timer.lap("curvature");

    let mut result = ExperimentResult {
        name: config.name.clone(),
        seed: config.seed(),
        n_points: n,
        n_hat,
        dimension,
        n_hat_sweep,
        bandwidth,
        summary: Summary::from_reports(&reports),
        timings: Vec::new(),
        total_seconds: 0.0,
        reports,
        chart,
    };
    if let Some(dir) = &config.output.dir {
        write_outputs(&result, config, dir).map_err(|e| e.in_stage("output"))?;
        timer.lap("output");
    }
    result.timings = timer.stages;
    result.total_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.output.dir {
        let path = dir.join("summary.json");
        std::fs::write(&path, result.summary_json())
            .map_err(|e| Error::io(&path, e).in_stage("output"))?;
    }
    Ok(result)
}

fn write_outputs(result: &ExperimentResult, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write("reports.csv", result.reports_csv())?;
    if config.output.dump_ratios {
        write("ratios.csv", result.ratios_csv())?;
    }
    write("config.json", config.to_json())?;
    if !result.reports.is_empty() {
        let values: Vec<f64> = result.reports.iter().map(|r| r.s_hat).collect();
        emit_histogram(
            &values,
            config.output.bins,
            config.output.log_histogram,
            &dir.join("histogram.svg"),
        )?;
    }
    Ok(())
}
