use thiserror::Error;

/// Errors produced by the geometry, dynamics and orbit routines.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used for the
/// computation so that the error type stays independent of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("radius {r} is outside the radial domain ({lo}, {hi})")]
    Domain { r: f64, lo: f64, hi: f64 },
    #[error("metric coefficient has no interior point of positivity")]
    EmptyDomain,
    #[error("point lies at the origin of the chart")]
    Origin,
    #[error("quadrature did not reach tolerance: estimate {estimate:e} > {tolerance:e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },
    #[error("oscillator potential is singular: inner expression vanishes at r = {r}")]
    SingularInner { r: f64 },
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("integrator failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("no orbit with these constants: {0}")]
    DegenerateOrbit(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("orbit is radial (J = 0)")]
    RadialOrbit,
    #[error("need at least two radial turning events, found {found}")]
    InsufficientTurningPoints { found: usize },
    #[error("branch index {k} is inconsistent with cover order {n}")]
    InconsistentBranch { k: usize, n: usize },
    #[error("trajectory does not cover all branches: azimuth advance {advance} < 2*pi")]
    InsufficientCoverage { advance: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
