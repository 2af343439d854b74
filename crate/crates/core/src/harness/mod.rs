//! Parameter scans of the projection stage, Poisson count simulation and
//! visibility estimation.

mod counts;
mod output;
mod scan;
mod visibility;

pub use counts::{simulate_counts, RateModel};
pub use output::{write_csv, write_json, RunManifest};
pub use scan::{gaussian_overlap, run_scan, ScanKind, ScanPoint, ScanResult, ScanSpec};
pub use visibility::{estimate_visibility, model_extremes, Visibility};

use thiserror::Error;

use crate::projection::ProjectionError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scan: {0}")]
    InvalidSpec(String),
    #[error("invalid rate model: {0}")]
    InvalidModel(String),
    #[error("fit cannot separate amplitude from offset on this grid")]
    FitDegenerate,
    #[error("visibility fit needs at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("visibility fit supports equal-angle, full-overlap delta scans only")]
    UnsupportedScan,
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
