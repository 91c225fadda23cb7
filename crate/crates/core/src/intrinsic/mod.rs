//! Intrinsic dimension and pointwise density from distances alone.

mod density;
mod dimension;

pub use density::{
    default_bandwidth, kde_density, mean_ball_density, DensityField, DistanceSource, Kernel,
};
pub use dimension::{levina_bickel, DimensionEstimate};
