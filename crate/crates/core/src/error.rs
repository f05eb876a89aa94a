use alloc::string::String;
use alloc::vec::Vec;

/// Failure modes shared by every geometric operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point {point:?} lies outside the chart domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("metric is degenerate at {point:?} (|det g| = {det:e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },
    #[error("plane is degenerate (denominator {denominator:e}); use the lightlike sectional curvature")]
    DegeneratePlane { denominator: f64 },
    #[error("metric is not Lorentzian ({negative} negative eigenvalues)")]
    NotLorentzian { negative: usize },
    #[error("warping function is not positive (sampled value {value:e})")]
    NonPositiveWarp { value: f64 },
    #[error("invalid degenerate plane: {0}")]
    InvalidPlane(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field family {family} does not match space {space}")]
    FamilyMismatch { family: String, space: String },
    #[error("flow left the domain at time {time}")]
    DomainExit { time: f64 },
    #[error("integration step underflow (step {step:e})")]
    StepUnderflow { step: f64 },
    #[error("leaf is not orthogonal to the field (|g(V, tangent)| = {defect:e})")]
    NonOrthogonalLeaf { defect: f64 },
    #[error("reference slice vanishes on the grid")]
    VanishingReference,
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("failed to construct {0} after bounded retries")]
    RetriesExhausted(String),
}

pub type Result<T> = core::result::Result<T, GeometryError>;
