//! Pointwise scalar curvature of an unknown Riemannian manifold, estimated
//! from nothing but a finite metric space.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`metric`]: distance matrices, point clouds and their file formats
//! - [`samplers`]: synthetic manifolds with ground-truth curvature
//! - [`graph`]: k-NN graph geodesics and weighted-graph input
//! - [`intrinsic`]: dimension (Levina–Bickel) and density (KDE) estimates
//! - [`curvature`]: ball-volume ratios, quadratic fit and `Ŝ`
//! - [`harness`]: configurable experiments, reports and acceptance checks

pub mod curvature;
pub mod error;
pub mod graph;
pub mod harness;
pub mod intrinsic;
pub mod metric;
pub mod oracles;
pub mod samplers;

pub use error::{Error, Result};
