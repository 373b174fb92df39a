use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Levy index: {0}")]
    InvalidLevyIndex(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid fractional order {0}: must lie in (0, 4]")]
    InvalidOrder(f64),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("insufficient support: {0}")]
    InsufficientSupport(String),

    #[error("invalid scale parameter K = {0}: must be finite and > 0")]
    InvalidScale(f64),

    #[error("invalid tolerance {tol}: expected a value in ({lo:e}, {hi:e})")]
    InvalidTolerance { tol: f64, lo: f64, hi: f64 },

    #[error("quadrature tolerance not met at xi = {xi}: error estimate {estimate:e} > target {target:e}")]
    ToleranceNotMet { xi: f64, estimate: f64, target: f64 },

    #[error("value outside double range: {0}")]
    Overflow(String),

    #[error("degenerate constraint system: largest singular value is zero")]
    DegenerateSystem,

    #[error("constraint system leaves no free coefficients")]
    NoFreedom,

    #[error("expected {expected} free coefficients, got {got}")]
    FreeChoiceLength { expected: usize, got: usize },

    #[error("coefficients violate the zero-sum constraint: |sum| = {sum:e}, max |C| = {max:e}")]
    ZeroSumViolated { sum: f64, max: f64 },

    #[error("constants config is missing `{0}`")]
    ConfigMissing(String),

    #[error("constants config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("unknown particle `{0}`")]
    UnknownParticle(String),

    #[error("first-order minimal-length correction invalid: relative beta term {ratio:e} exceeds {limit}")]
    PerturbationInvalid { ratio: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
