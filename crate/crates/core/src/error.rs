use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("point ({x}, {y}) is outside the domain: {reason}")]
    Domain { x: f64, y: f64, reason: String },
    #[error("degenerate map: det A = {det} at ({x}, {y})")]
    DegenerateMap { x: f64, y: f64, det: f64 },
    #[error("unsupported base sample: {0}")]
    UnsupportedBase(String),
    #[error("unsupported spec: {0}")]
    UnsupportedSpec(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("point ({x}, {y}) not found in mesh")]
    NotFound { x: f64, y: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("material error: {0}")]
    Material(String),
    #[error("boundary configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("setup error: {0}")]
    Setup(String),
    #[error("comparison error: {0}")]
    Comparison(String),
    #[error("probe {probe} never crossed the threshold")]
    NonArrival { probe: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(p: crate::Point, reason: impl Into<String>) -> Self {
        Error::Domain {
            x: p.x,
            y: p.y,
            reason: reason.into(),
        }
    }

    /// True for failures raised while solving, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Solver(_) | Error::Setup(_) | Error::Geometry(_) | Error::NonArrival { .. }
        )
    }
}
