use std::f64::consts::PI;

use crate::curvature::ScheduleMode;
use crate::error::{Error, Result};
use crate::intrinsic::Kernel;
use crate::samplers::{ManifoldTag, NoiseSpec};

use super::config::{
    Bandwidth, DataSpec, DensityConfig, DensityDistances, DimensionConfig, DistanceMethod,
    ExperimentConfig, OutputConfig, RadiiConfig, CONFIG_VERSION,
};

pub const DEFAULT_COUNT: usize = 4000;
pub const FULL_COUNT: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const NOISE_LEVELS: [f64; 4] = [0.001, 0.003, 0.01, 0.03];

const PRESETS: &[&str] = &[
    "sphere2-exact",
    "sphere2-graph",
    "sphere3-exact",
    "sphere3-graph",
    "sphere5-exact",
    "sphere5-graph",
    "sphere7-exact",
    "sphere7-graph",
    "euclidean-disk-exact",
    "euclidean-disk-graph",
    "poincare-disk",
    "torus",
    "hyperboloid",
    "sphere2-noise-0.001",
    "sphere2-noise-0.003",
    "sphere2-noise-0.01",
    "sphere2-noise-0.03",
];

pub fn preset_names() -> &'static [&'static str] {
    PRESETS
}

/// Graph neighbor count used for spheres of each dimension.
pub fn graph_k_for_dimension(n: usize) -> usize {
    match n {
        0..=2 => 20,
        3 => 50,
        4..=5 => 100,
        _ => 200,
    }
}

fn base(name: &str, manifold: ManifoldTag, count: usize, distances: DistanceMethod) -> ExperimentConfig {
    let n = manifold.intrinsic_dim();
    let (r_max, kernel) = match manifold {
        ManifoldTag::Sphere { .. } => (PI / 2.0, if n >= 3 { Kernel::Biweight } else { Kernel::Gaussian }),
        ManifoldTag::EuclideanDisk { .. } | ManifoldTag::PoincareDisk { .. } => (1.0, Kernel::Gaussian),
        ManifoldTag::Torus { .. } => (PI, Kernel::Gaussian),
        ManifoldTag::Hyperboloid => (2.0, Kernel::Gaussian),
    };
    ExperimentConfig {
        version: CONFIG_VERSION,
        name: name.to_string(),
        data: DataSpec::Synthetic {
            manifold,
            count,
            seed: DEFAULT_SEED,
            noise: None,
        },
        distances,
        dimension: DimensionConfig {
            k1: 20,
            k2: 100,
            sweep_from: Some(30),
            fixed: None,
        },
        density: DensityConfig {
            kernel,
            bandwidth: Bandwidth::Auto,
            distances: DensityDistances::Geodesic,
        },
        radii: RadiiConfig {
            r_min: 0.0,
            r_max,
            schedule: ScheduleMode::NearestNeighbor,
        },
        evaluation: None,
        output: OutputConfig::default(),
    }
}

/// Built-in experiment configuration; `count` overrides the sample size.
pub fn preset(name: &str, count: Option<usize>) -> Result<ExperimentConfig> {
    let count = count.unwrap_or(DEFAULT_COUNT);
    let unknown = || {
        Error::Config(format!(
            "unknown preset '{name}'; available: {}",
            PRESETS.join(", ")
        ))
    };
    if let Some(level) = name.strip_prefix("sphere2-noise-") {
        let sigma: f64 = level.parse().map_err(|_| unknown())?;
        if !NOISE_LEVELS.contains(&sigma) {
            return Err(unknown());
        }
        let mut cfg = base(
            name,
            ManifoldTag::Sphere { dim: 2 },
            count,
            DistanceMethod::Graph { k: graph_k_for_dimension(2) },
        );
        if let DataSpec::Synthetic { noise, .. } = &mut cfg.data {
            *noise = Some(NoiseSpec { sigma, seed: DEFAULT_SEED + 1 });
        }
        cfg.density.distances = DensityDistances::Euclidean;
        return Ok(cfg);
    }
    let cfg = match name {
        "euclidean-disk-exact" => base(name, ManifoldTag::EuclideanDisk { radius: 2.0 }, count, DistanceMethod::Exact),
        "euclidean-disk-graph" => base(
            name,
            ManifoldTag::EuclideanDisk { radius: 2.0 },
            count,
            DistanceMethod::Graph { k: 20 },
        ),
        "poincare-disk" => base(
            name,
            ManifoldTag::PoincareDisk { hyperbolic_radius: 2.0 },
            count,
            DistanceMethod::Exact,
        ),
        "torus" => base(
            name,
            ManifoldTag::Torus { tube_radius: 1.0, center_radius: 2.0 },
            count,
            DistanceMethod::Graph { k: 20 },
        ),
        "hyperboloid" => base(name, ManifoldTag::Hyperboloid, count, DistanceMethod::Graph { k: 20 }),
        _ => {
            let rest = name.strip_prefix("sphere").ok_or_else(unknown)?;
            let (dim, method) = rest.split_once('-').ok_or_else(unknown)?;
            let dim: usize = dim.parse().map_err(|_| unknown())?;
            if ![2, 3, 5, 7].contains(&dim) {
                return Err(unknown());
            }
            let method = match method {
                "exact" => DistanceMethod::Exact,
                "graph" => DistanceMethod::Graph { k: graph_k_for_dimension(dim) },
                _ => return Err(unknown()),
            };
            base(name, ManifoldTag::Sphere { dim }, count, method)
        }
    };
    Ok(cfg)
}
