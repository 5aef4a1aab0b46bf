use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("{what} underflows for argument {value}")]
    Underflow { what: &'static str, value: f64 },

    #[error("quadrature did not converge (error estimate {estimate:.3e})")]
    QuadratureNotConverged { estimate: f64 },

    #[error("invalid domain parameters: {0}")]
    InvalidDomain(String),

    #[error("outer free boundary {r_plus} exceeds R0 - delta = {limit}")]
    DomainTooSmall { r_plus: f64, limit: f64 },

    #[error("q0 = {q0} is not above the annular threshold {threshold}; use the dimple family")]
    BelowDimpleThreshold { q0: f64, threshold: f64 },

    #[error("mean mass {u_bar} implies center value {u_center} outside (-1, 1]")]
    OutOfBand { u_bar: f64, u_center: f64 },

    #[error("root finder failed: {0}")]
    RootNotFound(String),

    #[error("grid point {0} outside [0, R0]")]
    GridOutOfRange(f64),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("self-intersection between segments {0} and {1}")]
    SelfIntersection(usize, usize),

    #[error("curvature blow-up: max |kappa| * h = {0:.3}")]
    CurvatureBlowUp(f64),

    #[error("curve is not star-shaped about the origin")]
    NotStarShaped,

    #[error("nonlinear solve did not converge (residual {residual:.3e})")]
    NotConverged { residual: f64 },

    #[error("active-set iteration did not converge (residual {residual:.3e})")]
    ObstacleSolveFailed { residual: f64 },

    #[error("step rejected after {halvings} halvings of tau")]
    StepRejected { halvings: u32 },

    #[error("singular linear system")]
    Singular,

    #[error("profile has no zero crossing")]
    NoCrossing,

    #[error("profile has multiple zero crossings at {0:?}")]
    MultipleCrossings(Vec<f64>),
}
