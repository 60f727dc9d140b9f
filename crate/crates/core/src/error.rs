use alloc::string::String;

/// Errors raised by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("degenerate element {element} (signed area {area:e})")]
    DegenerateElement { element: usize, area: f64 },
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),
    #[error("point ({x}, {y}) lies outside the mesh; nearest boundary is {distance:e} m away")]
    PointOutsideMesh { x: f64, y: f64, distance: f64 },
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("invalid material `{region}`: {reason}")]
    InvalidMaterial { region: String, reason: String },
    #[error("invalid boundary specification: {0}")]
    InvalidBoundary(String),
    #[error("conflicting Dirichlet values on node {node}: {first} vs {second}")]
    ConflictingDirichlet { node: usize, first: f64, second: f64 },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("threshold {threshold} never crossed")]
    ThresholdNotCrossed { threshold: f64 },
    #[error("invalid calibration problem: {0}")]
    InvalidCalibration(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
