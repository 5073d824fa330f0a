//! TDoA localization: geometry, Fisher information, position covariance,
//! error ellipses, maximum-likelihood estimation and CRB surfaces.
//!
//! Observations are range differences in metres: `φ_n = d_n − d_1 + ε_n` for
//! `n = 2..N`, with i.i.d. `ε_n ~ N(0, 2c²σ_t²)`. Under that model the Fisher
//! matrix of the position is
//!
//! ```text
//! J = 1/(2c²σ_t²) Σ_{n≥2} g_n g_nᵀ,   g_n = (cos θ_n − cos θ_1, sin θ_n − sin θ_1)
//! ```
//!
//! where `θ_n` is the bearing from the point to station `n`. Station 1 is the
//! TDoA reference. Cross-correlation between the `φ_n` (they all share
//! station 1's timing) is ignored.

mod ellipse;
mod estimate;
mod fisher;
mod grid;
mod scenario;

pub use ellipse::{coverage_probability, error_ellipse, ErrorEllipse};
pub use estimate::{ml_estimate, neg_log_likelihood, sample_tdoa, TdoaObservation, MAX_ITERATIONS, STEP_TOLERANCE_M};
pub use fisher::{fisher_matrix, geometry, position_covariance, position_pdf, FisherMatrix, Geometry, PositionCovariance};
pub use grid::{crb_grid, CrbGrid, CrbPoint, CrbValue, GridSpec};
pub use scenario::Scenario;

use thiserror::Error;

/// Minimum distance between a station and an evaluation point, metres.
pub const MIN_SEPARATION_M: f64 = 1e-6;
/// Condition number above which a Fisher matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("point coincides with reference station {0}")]
    Coincident(usize),
    #[error("observation has {got} entries, expected {expected}")]
    ObservationLength { got: usize, expected: usize },
    #[error("degenerate geometry: Fisher matrix is singular")]
    DegenerateGeometry,
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("correlation |ρ| = {0} must be below 1")]
    Correlation(f64),
    #[error("position estimation failed: {0}")]
    EstimationFailed(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
}
