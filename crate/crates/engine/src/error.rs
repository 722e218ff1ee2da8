use rhoscale_core::CoreError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("frequency component {xi} exceeds the Nyquist limit {limit} at eps = {eps}")]
    Nyquist { xi: f64, limit: f64, eps: f64 },
    #[error("cutoff around {center:?} with radius {radius} leaves the grid [-{extent}, {extent}]")]
    CutoffEscapesGrid { center: Vec<f64>, radius: f64, extent: f64 },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("window radius {radius} exceeds the domain extent {extent}")]
    WindowExceedsDomain { radius: f64, extent: f64 },
    #[error("dimension {0} not supported (1 or 2)")]
    Dimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("finite-difference stencil leaves the grid (half-width {radius}, step {step})")]
    StencilExceedsGrid { radius: f64, step: f64 },
    #[error("grid spacing {spacing} is below the sampling step {step} at eps = {eps}")]
    SpacingBelowStep { spacing: f64, step: f64, eps: f64 },
    #[error("generalized functions live on different grids or ladders")]
    GridMismatch,
    #[error("direction {0:?} is not a unit vector")]
    BadDirection(Vec<f64>),
    #[error("x0 = {0:?} is outside |x0| <= L/2")]
    CenterOutOfDomain(Vec<f64>),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
