use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("points {i} and {j} coincide (distance {distance:e})")]
    DuplicatePoints { i: usize, j: usize, distance: f64 },

    #[error("point {index} = {point} is not strictly inside the half-plane")]
    OutsideHalfPlane { index: usize, point: Complex64 },

    #[error("coincident points: carleson factor undefined")]
    CoincidentPoints,

    #[error("sequence needs at least two points")]
    Degenerate,

    #[error("strip bound required but not set")]
    MissingStripBound,

    #[error("quadrature not converged: last = {last}, previous = {previous}")]
    QuadratureNotConverged { last: Complex64, previous: Complex64 },

    #[error("truncation insufficient: tail estimate {tail:e} vs value {value:e} at radius {radius}")]
    TruncationInsufficient { tail: f64, value: f64, radius: f64 },

    #[error("log-magnitude {log_magnitude} overflows at z = {z}")]
    Range { z: Complex64, log_magnitude: f64 },

    #[error("numerically multiple zero at node {index} (|S'| = {derivative:e})")]
    MultipleZero { index: usize, derivative: f64 },

    #[error("carleson product underflow at node {index} (ln theta = {log_theta})")]
    ProductUnderflow { index: usize, log_theta: f64 },

    #[error("family does not match nodes: {0}")]
    FamilyMismatch(String),

    #[error("epsilon mismatch: multiplier built with {multiplier}, problem uses {problem}")]
    EpsilonMismatch { multiplier: f64, problem: f64 },

    #[error("uncontrollable mode {index}: b = 0 with nonzero target moment")]
    UncontrollableMode { index: usize },

    #[error("unstable eigenvalue at mode {index}: {lambda}")]
    UnstableEigenvalue { index: usize, lambda: Complex64 },

    #[error("simulation refinement not converged: endpoint change {change:e}")]
    SimulationNotConverged { change: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
