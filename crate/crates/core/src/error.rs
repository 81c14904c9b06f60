//! Error type shared by every module of the kernel.

use thiserror::Error;

/// Failures raised by geometry, kinematics, constitutive evaluation, residual
/// checks, simulations and the scenario harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain")]
    PointOutsideChart { point: Vec<f64> },
    #[error("metric is singular or not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("metric is not symmetric at {point:?} (defect {defect:e})")]
    AsymmetricMetric { point: Vec<f64>, defect: f64 },
    #[error("valence mismatch: expected {expected}, found {found}")]
    ValenceMismatch { expected: String, found: String },
    #[error("node {node} is on the boundary; central stencil unavailable")]
    BoundaryNode { node: usize },
    #[error("deformation gradient degenerate at node {node} (det = {det:e})")]
    DegenerateF { node: usize, det: f64 },
    #[error("motion is not injective: nodes {first} and {second} coincide")]
    NonInjectiveMotion { first: usize, second: usize },
    #[error("a required time level is missing: {0}")]
    MissingTimeLevel(String),
    #[error("slot {slot} is not part of the {signature} signature")]
    SlotNotInSignature { slot: String, signature: String },
    #[error("energy evaluation returned a non-finite value")]
    NonFiniteEnergy,
    #[error("relative gradient F0 is singular at node {node}")]
    SingularF0 { node: usize },
    #[error("normal has zero length")]
    ZeroNormal,
    #[error("experiment requires a Euclidean ambient chart")]
    NonEuclideanChart,
    #[error("time step {dt:e} exceeds the CFL bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("void fraction {value} out of (0,1] at node {node}, step {step}")]
    VoidFractionOutOfRange { node: usize, value: f64, step: usize },
    #[error("Lagrangian density is not finite")]
    NonFiniteDensity,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical blow-up: {0}")]
    NumericBlowUp(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("regime requires field '{0}'")]
    RegimeFieldMissing(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
