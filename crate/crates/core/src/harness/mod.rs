//! Config-driven experiments, histogram output and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod histogram;
pub mod presets;
pub mod run;

pub use acceptance::{acceptance_suite, check_median, score_surfaces, AcceptanceOptions, AcceptanceReport, Criterion, CriterionResult};
pub use config::ExperimentConfig;
pub use histogram::{emit_histogram, histogram_counts, render_svg, Histogram};
pub use presets::{preset, preset_names};
pub use run::{run_experiment, ExperimentResult, StageTiming, Summary};
