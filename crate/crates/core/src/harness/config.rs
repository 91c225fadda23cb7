use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curvature::ScheduleMode;
use crate::error::{Error, Result};
use crate::intrinsic::Kernel;
use crate::metric::MatrixFormat;
use crate::samplers::{ManifoldTag, NoiseSpec};

pub const CONFIG_VERSION: u32 = 1;

/// Where the data for an experiment comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSpec {
    Synthetic {
        manifold: ManifoldTag,
        count: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise: Option<NoiseSpec>,
    },
    PointCloud {
        path: PathBuf,
    },
    DistanceMatrix {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<FileFormat>,
    },
    EdgeList {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Csv,
    Binary,
}

impl From<FileFormat> for MatrixFormat {
    fn from(f: FileFormat) -> Self {
        match f {
            FileFormat::Csv => MatrixFormat::Csv,
            FileFormat::Binary => MatrixFormat::Binary,
        }
    }
}

/// How geodesic distances are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DistanceMethod {
    /// Closed-form geodesics of a synthetic manifold.
    Exact,
    /// Shortest paths in the symmetrized k-nearest-neighbor graph.
    Graph { k: usize },
    /// Use the loaded matrix or edge list as is.
    Given,
}

/// Which distances feed the density estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityDistances {
    Geodesic,
    Euclidean,
    /// The known sampling density of a synthetic manifold.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub kernel: Kernel,
    pub bandwidth: Bandwidth,
    pub distances: DensityDistances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionConfig {
    pub k1: usize,
    pub k2: usize,
    /// Smallest k2 reported in the stability sweep `sweep_from..=k2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_from: Option<usize>,
    /// Skip estimation and use this dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub schedule: ScheduleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub bins: usize,
    pub log_histogram: bool,
    pub dump_ratios: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            bins: 40,
            log_histogram: false,
            dump_ratios: false,
        }
    }
}

/// A complete, serializable description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub data: DataSpec,
    pub distances: DistanceMethod,
    pub dimension: DimensionConfig,
    pub density: DensityConfig,
    pub radii: RadiiConfig,
    /// Points to evaluate; defaults to the sample's own evaluation set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<PathBuf>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.data {
            DataSpec::Synthetic { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        let synthetic = matches!(self.data, DataSpec::Synthetic { .. });
        match (&self.data, self.distances) {
            (DataSpec::Synthetic { noise: Some(n), .. }, DistanceMethod::Exact) if n.sigma > 0.0 => {
                return bad("exact geodesics are undefined for noisy samples; use graph distances".into())
            }
            (DataSpec::Synthetic { .. }, DistanceMethod::Given) => {
                return bad("synthetic data has no given distances; use exact or graph".into())
            }
            (DataSpec::PointCloud { .. }, DistanceMethod::Exact | DistanceMethod::Given) => {
                return bad("a point cloud needs graph distances".into())
            }
            (DataSpec::DistanceMatrix { .. } | DataSpec::EdgeList { .. }, DistanceMethod::Exact) => {
                return bad("exact geodesics need a synthetic manifold".into())
            }
            (DataSpec::EdgeList { .. }, DistanceMethod::Graph { .. }) => {
                return bad("an edge list is already a graph; use given distances".into())
            }
            _ => {}
        }
        if let DistanceMethod::Graph { k } = self.distances {
            if k == 0 {
                return bad("graph neighbor count k must be positive".into());
            }
        }
        if let DataSpec::Synthetic { noise: Some(n), .. } = &self.data {
            if !(n.sigma >= 0.0) {
                return bad(format!("noise sigma must be nonnegative, got {}", n.sigma));
            }
        }
        let embedded_only = matches!(self.data, DataSpec::Synthetic { .. } | DataSpec::PointCloud { .. });
        if self.density.distances == DensityDistances::Euclidean && !embedded_only {
            return bad("Euclidean density needs ambient coordinates".into());
        }
        if self.density.distances == DensityDistances::Oracle && !synthetic {
            return bad("oracle density needs a synthetic manifold".into());
        }
        if let Bandwidth::Fixed(h) = self.density.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("bandwidth must be positive, got {h}"));
            }
        }
        let dim = &self.dimension;
        if dim.k1 < 2 || dim.k1 > dim.k2 {
            return bad(format!("need 2 <= k1 <= k2, got k1 = {}, k2 = {}", dim.k1, dim.k2));
        }
        if let Some(from) = dim.sweep_from {
            if from < dim.k1 || from > dim.k2 {
                return bad(format!("sweep_from = {from} outside {}..={}", dim.k1, dim.k2));
            }
        }
        if dim.fixed == Some(0) {
            return bad("fixed dimension must be positive".into());
        }
        let r = &self.radii;
        if !(r.r_min >= 0.0 && r.r_max > r.r_min && r.r_max.is_finite()) {
            return bad(format!("need 0 <= r_min < r_max, got {} and {}", r.r_min, r.r_max));
        }
        if self.output.bins == 0 {
            return bad("histogram needs at least one bin".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::{preset, preset_names};

    #[test]
    fn presets_round_trip_through_json() {
        for name in preset_names() {
            let cfg = preset(name, None).unwrap();
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let mut cfg = preset("sphere2-noise-0.01", None).unwrap();
        cfg.distances = DistanceMethod::Exact;
        assert!(cfg.validate().is_err());

        let mut cfg = preset("sphere2-exact", None).unwrap();
        cfg.version = 99;
        assert!(cfg.validate().is_err());

        let mut cfg = preset("sphere2-exact", None).unwrap();
        cfg.radii.r_max = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = preset("sphere2-exact", None).unwrap();
        cfg.data = DataSpec::DistanceMatrix { path: "d.bin".into(), format: None };
        cfg.distances = DistanceMethod::Given;
        cfg.density.distances = DensityDistances::Euclidean;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_reported() {
        let err = ExperimentConfig::from_json("{\"version\": 1}").unwrap_err();
        assert!(err.to_string().contains("missing field"), "{err}");
    }
}
