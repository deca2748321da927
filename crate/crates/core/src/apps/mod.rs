//! Scenario generators, depot placement, rendering and benchmarking.

mod bench;
mod depots;
mod generate;
mod render;
mod scenario;

pub use bench::{bench_csv, covered_segments, run_benchmark, BenchCase, BenchRecord, BENCH_COLUMNS};
pub use depots::{apply_depots, kmedoids_depots, DepotPlan};
pub use generate::{gen_grid, gen_micro, gen_random_planar, gen_spiral, MicroSpec};
pub use render::{render_svg, RenderSpec};
pub use scenario::{CorrelationRecipe, GeneratorKind, ScenarioSpec};

use thiserror::Error;

use crate::correlation::WeightError;
use crate::exact::ExactError;
use crate::instance::InstanceError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("cannot form {k} clusters from {items} service edges")]
    TooManyClusters { k: usize, items: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, AppError>;
