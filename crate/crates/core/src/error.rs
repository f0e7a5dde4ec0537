use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum FracError {
    #[error("s = {0} rejected: the fractional perimeter requires s ∈ (0,1/2)")]
    SOutOfRange(f64),
    #[error("s = {0} rejected: this functional requires s ∈ (0,1)")]
    SOutOfUnit(f64),
    #[error("eps = {0} rejected: the rescaled functional requires eps ∈ (0,1)")]
    EpsOutOfRange(f64),
    #[error("truncation radius {rt} is below the minimum 4h = {min}")]
    TruncationTooSmall { rt: f64, min: f64 },
    #[error("exterior shape has no asymptotic density and no radial profile; analytic tail unavailable")]
    TailUnavailable,
    #[error("cell-pair weight requested for the zero offset (self-interaction)")]
    ZeroOffset,
    #[error("interaction table needs {needed} offsets, above the cap of {cap}")]
    OutOfMemory { needed: usize, cap: usize },
    #[error("no closed-form local quantities for this shape")]
    UnsupportedShape,
    #[error("point ({0}, {1}) is not on the set boundary")]
    NotOnBoundary(f64, f64),
    #[error("invalid radii: need 0 < rho0 < R_t, got rho0 = {rho0}, R_t = {rt}")]
    BadRadii { rho0: f64, rt: f64 },
    #[error("problem has {cells} cells, above the exact-solver cap of {cap}; use flip descent")]
    TooLarge { cells: usize, cap: usize },
    #[error("descent step size underflowed before reaching the tolerance")]
    NoProgress,
    #[error("field value at the evaluation center is not above theta1")]
    CenterBelowTheta,
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FracError>;

impl FracError {
    /// True for errors caused by invalid inputs or preconditions, as opposed
    /// to failures of the numerics themselves. The CLI maps the former to
    /// exit code 2 and the latter to exit code 3.
    pub fn is_validation(&self) -> bool {
        !matches!(self, FracError::NoProgress | FracError::OutOfMemory { .. })
    }
}
