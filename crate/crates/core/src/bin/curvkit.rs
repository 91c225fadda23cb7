use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use curvkit::curvature::{CurvatureEstimator, ScheduleMode};
use curvkit::graph::{build_knn_graph, load_graph, shortest_path_distances, shortest_path_rows, WeightedGraph};
use curvkit::harness::acceptance::{acceptance_suite, AcceptanceOptions, Criterion};
use curvkit::harness::config::{DataSpec, ExperimentConfig};
use curvkit::harness::presets::{preset, preset_names, DEFAULT_SEED, FULL_COUNT};
use curvkit::harness::run::run_experiment;
use curvkit::intrinsic::{default_bandwidth, kde_density, levina_bickel, DistanceSource, Kernel};
use curvkit::metric::{load_distance_matrix, CloudMetric, DistanceMatrix, EvaluationSet, MatrixFormat, Metric, PointCloud};
use curvkit::samplers::{add_noise, sample, Labels, ManifoldTag, NoiseSpec};
use curvkit::{Error, Result};

#[derive(Parser)]
#[command(name = "curvkit", version, about = "Scalar curvature estimation from metric data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a labeled sample from a synthetic manifold.
    Sample(SampleArgs),
    /// Estimate geodesic distances by k-nearest-neighbor graph shortest paths.
    Distances(DistancesArgs),
    /// Estimate scalar curvature from a distance matrix or point cloud.
    Estimate(EstimateArgs),
    /// Run built-in experiments and the acceptance suite.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Manifold {
    Sphere,
    EuclideanDisk,
    PoincareDisk,
    Torus,
    Hyperboloid,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(value_enum)]
    manifold: Manifold,
    /// Sphere dimension n of S^n.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 4000)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Standard deviation of isotropic Gaussian noise added to coordinates.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Output directory for cloud.csv, labels.csv and distances.bin.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DistancesArgs {
    /// Point cloud CSV.
    #[arg(long, conflicts_with = "edges", required_unless_present = "edges")]
    cloud: Option<PathBuf>,
    /// Weighted edge list (`i j w` per line) used as the graph directly.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Neighbor count for the k-nearest-neighbor graph.
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// `all`, or a file of source indices (one per line).
    #[arg(long, default_value = "all")]
    sources: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Distance matrix (.csv, otherwise binary).
    #[arg(long, required_unless_present = "cloud")]
    distances: Option<PathBuf>,
    /// Point cloud CSV; with --geodesic-k it supplies the distances.
    #[arg(long)]
    cloud: Option<PathBuf>,
    #[arg(long)]
    geodesic_k: Option<usize>,
    /// Labels CSV from `sample`, for true_S and the default mask.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// File of point indices to evaluate; defaults to the labels mask or all points.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelArg,
    /// Kernel bandwidth, or `auto`.
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    #[arg(long, value_enum, default_value = "geodesic")]
    density_distances: DensityArg,
    #[arg(long, default_value_t = 20)]
    k1: usize,
    #[arg(long, default_value_t = 100)]
    k2: usize,
    /// Intrinsic dimension, or `auto` for the Levina-Bickel estimate.
    #[arg(long, default_value = "auto")]
    dimension: String,
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long)]
    r_max: f64,
    /// `nn` or `grid:<step>`.
    #[arg(long, default_value = "nn")]
    schedule: ScheduleMode,
    /// Reports CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-point ratio sequence CSV.
    #[arg(long)]
    dump_ratios: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    Biweight,
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityArg {
    Geodesic,
    Euclidean,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run a preset or a JSON config file.
    Run(RunArgs),
    /// Run the acceptance criteria and print one line per criterion.
    Accept(AcceptArgs),
    /// List the built-in presets.
    List,
    /// Print the JSON config of a preset.
    Show {
        preset: String,
        #[arg(long)]
        full: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or path to a JSON config.
    target: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the full sample size of 10^4 points.
    #[arg(long)]
    full: bool,
    #[arg(long, conflicts_with = "full")]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bins: Option<usize>,
    /// Plot the histogram on log-log axes.
    #[arg(long)]
    log_histogram: bool,
    #[arg(long)]
    dump_ratios: bool,
}

#[derive(Args)]
struct AcceptArgs {
    /// Criterion ids to run (default: all).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    #[arg(long, default_value_t = curvkit::harness::presets::DEFAULT_COUNT)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write the machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn configure_threads() {
    if let Ok(v) = std::env::var("CURVKIT_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not set thread count: {e}");
                }
            }
            _ => log::warn!("ignoring CURVKIT_THREADS={v:?}; expected a positive integer"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(a) => cmd_sample(a).map(|_| true),
        Command::Distances(a) => cmd_distances(a).map(|_| true),
        Command::Estimate(a) => cmd_estimate(a).map(|_| true),
        Command::Experiment(ExperimentCommand::Run(a)) => cmd_run(a).map(|_| true),
        Command::Experiment(ExperimentCommand::Accept(a)) => cmd_accept(a),
        Command::Experiment(ExperimentCommand::List) => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(true)
        }
        Command::Experiment(ExperimentCommand::Show { preset: name, full }) => {
            preset(&name, full.then_some(FULL_COUNT)).map(|cfg| {
                println!("{}", cfg.to_json());
                true
            })
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(2)
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let tag = match a.manifold {
        Manifold::Sphere => ManifoldTag::Sphere { dim: a.dim },
        Manifold::EuclideanDisk => ManifoldTag::EuclideanDisk { radius: 2.0 },
        Manifold::PoincareDisk => ManifoldTag::PoincareDisk { hyperbolic_radius: 2.0 },
        Manifold::Torus => ManifoldTag::Torus {
            tube_radius: 1.0,
            center_radius: 2.0,
        },
        Manifold::Hyperboloid => ManifoldTag::Hyperboloid,
    };
    let mut s = sample(tag, a.count, a.seed)?;
    if let Some(sigma) = a.noise {
        s = add_noise(
            &s,
            NoiseSpec {
                sigma,
                seed: a.noise_seed.unwrap_or(a.seed.wrapping_add(1)),
            },
        )?;
    }
    create_dir(&a.out)?;
    s.cloud.save_csv(&a.out.join("cloud.csv"))?;
    s.save_labels(&a.out.join("labels.csv"))?;
    if let Some(d) = s.exact_distances() {
        d?.save_binary(&a.out.join("distances.bin"))?;
    }
    eprintln!("wrote {} points to {}", s.n_points(), a.out.display());
    Ok(())
}

fn cmd_distances(a: DistancesArgs) -> Result<()> {
    let g: WeightedGraph = match (&a.cloud, &a.edges) {
        (Some(path), _) => {
            let cloud = PointCloud::load_csv(path)?;
            build_knn_graph(&CloudMetric::euclidean(&cloud), a.k)?
        }
        (None, Some(path)) => load_graph(path)?,
        (None, None) => unreachable!("clap requires an input"),
    };
    if a.sources == "all" {
        shortest_path_distances(&g)?.save_binary(&a.out)
    } else {
        let sources = EvaluationSet::load(Path::new(&a.sources), g.n_nodes())?;
        shortest_path_rows(&g, &sources)?.save_binary(&a.out)
    }
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let cloud = a.cloud.as_deref().map(PointCloud::load_csv).transpose()?;
    let (d, geodesic_source): (DistanceMatrix, DistanceSource) = match (&a.distances, &cloud, a.geodesic_k) {
        (Some(path), _, None) => (
            load_distance_matrix(path, MatrixFormat::from_path(path))?,
            DistanceSource::Exact,
        ),
        (None, Some(c), Some(k)) => (
            shortest_path_distances(&build_knn_graph(&CloudMetric::euclidean(c), k)?)?,
            DistanceSource::Graph,
        ),
        (Some(_), _, Some(_)) => {
            return Err(Error::Config("give either --distances or --cloud with --geodesic-k".into()))
        }
        _ => return Err(Error::Config("--cloud needs --geodesic-k to estimate distances".into())),
    };
    let n = d.n_points();
    if let Some(c) = &cloud {
        if c.n_points() != n {
            return Err(Error::Config(format!(
                "cloud has {} points but the distance matrix has {n}",
                c.n_points()
            )));
        }
    }
    let labels = a.labels.as_deref().map(Labels::load).transpose()?;
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(Error::Config(format!("labels cover {} points, expected {n}", l.len())));
        }
    }

    let n_hat = if a.dimension == "auto" {
        levina_bickel(&d, a.k1, a.k2)?.n_hat
    } else {
        a.dimension
            .parse()
            .map_err(|_| Error::Config(format!("--dimension must be an integer or auto, got {:?}", a.dimension)))?
    };
    let kernel = match a.kernel {
        KernelArg::Gaussian => Kernel::Gaussian,
        KernelArg::Biweight => Kernel::Biweight,
    };
    let euclid;
    let (density_metric, source): (&dyn Metric, DistanceSource) = match a.density_distances {
        DensityArg::Geodesic => (&d, geodesic_source),
        DensityArg::Euclidean => {
            let c = cloud
                .as_ref()
                .ok_or_else(|| Error::Config("Euclidean density needs --cloud".into()))?;
            euclid = CloudMetric::euclidean(c);
            (&euclid, DistanceSource::Euclidean)
        }
    };
    let h = if a.bandwidth == "auto" {
        default_bandwidth(density_metric, n_hat)?
    } else {
        a.bandwidth
            .parse()
            .map_err(|_| Error::Config(format!("--bandwidth must be a number or auto, got {:?}", a.bandwidth)))?
    };
    let field = kde_density(density_metric, n_hat, kernel, h)?.with_distance_source(source);

    let points = match (&a.mask, &labels) {
        (Some(path), _) => EvaluationSet::load(path, n)?,
        (None, Some(l)) => l.evaluation.clone(),
        (None, None) => EvaluationSet::all(n),
    };
    let estimator = CurvatureEstimator {
        r_min: a.r_min,
        r_max: a.r_max,
        schedule: a.schedule,
    };
    let mut reports = estimator.estimate(&d, &field, &points, n_hat)?;
    if let Some(l) = &labels {
        for r in &mut reports {
            r.true_s = Some(l.true_curvature[r.index]);
        }
    }
    let mut csv = String::from("point_index,n_hat,C_hat,S_hat,true_S\n");
    for r in &reports {
        let truth = r.true_s.map(|t| t.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},{},{},{}\n", r.index, r.n_hat, r.c_hat, r.s_hat, truth));
    }
    match &a.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &a.dump_ratios {
        let mut s = String::from("point_index,radius,ratio\n");
        for r in &reports {
            for p in &r.ratios {
                s.push_str(&format!("{},{},{}\n", r.index, p.radius, p.ratio));
            }
        }
        write_text(path, &s)?;
    }
    eprintln!("n_hat = {n_hat}, bandwidth = {h}, {} points evaluated", reports.len());
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let count = if a.full { Some(FULL_COUNT) } else { a.count };
    let mut cfg = if a.target.ends_with(".json") || Path::new(&a.target).is_file() {
        let mut cfg = ExperimentConfig::load(Path::new(&a.target))?;
        if let (Some(c), DataSpec::Synthetic { count, .. }) = (count, &mut cfg.data) {
            *count = c;
        }
        cfg
    } else {
        preset(&a.target, count)?
    };
    if let (Some(s), DataSpec::Synthetic { seed, noise, .. }) = (a.seed, &mut cfg.data) {
        *seed = s;
        if let Some(n) = noise {
            n.seed = s.wrapping_add(1);
        }
    }
    if let Some(b) = a.bins {
        cfg.output.bins = b;
    }
    cfg.output.log_histogram |= a.log_histogram;
    cfg.output.dump_ratios |= a.dump_ratios;
    if a.out.is_some() {
        cfg.output.dir = a.out.clone();
    }
    let result = run_experiment(&cfg)?;
    let s = &result.summary;
    println!("{}: N = {}, n_hat = {}, evaluated {}", result.name, result.n_points, result.n_hat, s.n_evaluated);
    println!(
        "S_hat mean {:.4}  median {:.4}  std {:.4}  min {:.4}  max {:.4}",
        s.mean, s.median, s.std, s.min, s.max
    );
    if let Some(acc) = s.sign_accuracy {
        println!("sign accuracy {:.4} over {} points", acc, s.sign_points);
    }
    if let Some(r) = s.pearson {
        println!("Pearson r {r:.4}");
    }
    let stages: Vec<String> = result
        .timings
        .iter()
        .map(|t| format!("{} {:.2}s", t.stage, t.seconds))
        .collect();
    println!("{} (total {:.2}s)", stages.join(", "), result.total_seconds);
    Ok(())
}

fn cmd_accept(a: AcceptArgs) -> Result<bool> {
    let criteria: Vec<Criterion> = if a.criteria.is_empty() {
        Criterion::ALL.to_vec()
    } else {
        a.criteria
            .iter()
            .map(|&id| Criterion::from_id(id).ok_or_else(|| Error::Config(format!("no criterion {id}"))))
            .collect::<Result<_>>()?
    };
    let opts = AcceptanceOptions {
        count: a.count,
        seed: a.seed,
        verbose: false,
    };
    let report = acceptance_suite(&criteria, &opts);
    print!("{report}");
    if let Some(path) = &a.json {
        write_text(path, &report.to_json())?;
    }
    Ok(report.all_passed())
}
