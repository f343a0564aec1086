use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("coincident atom positions; coupling is undefined")]
    CoincidentPositions,

    #[error("requested {requested} atoms, limit is {limit}")]
    AtomCountOverflow { requested: u64, limit: u64 },

    #[error(
        "conditionally convergent ensemble average for isotropic 1/R^3 with a complex envelope; \
         use the Monte Carlo path"
    )]
    ConditionallyConvergent,

    #[error("sample geometry extent {extent:.3e} cm is below the required padding {required:.3e} cm")]
    InsufficientPadding { extent: f64, required: f64 },

    #[error("pulse area |F| = {area:.3e} vanishes; correlation is undefined")]
    VanishingPulseArea { area: f64 },

    #[error("requested bandwidth {requested:.6e} Hz is below the transform limit {limit:.6e} Hz")]
    BelowTransformLimit { requested: f64, limit: f64 },

    #[error("step size underflow at tau = {tau:.6e} (step {step:.3e})")]
    StepSizeUnderflow { tau: f64, step: f64 },

    #[error("{atoms} atoms exceed the propagator limit of {limit}")]
    TooManyAtoms { atoms: usize, limit: usize },

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
