use thiserror::Error;

/// Errors raised by the verifiers. Numerical failures that a report can absorb
/// are mapped to inconclusive verdicts by the callers in `verify`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight evaluates to non-positive value {value} at t = {t}")]
    NonPositiveValue { t: f64, value: f64 },
    #[error("quadrature did not settle: {0}")]
    QuadratureNoConvergence(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("derivative samples required but absent")]
    MissingDerivative,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid sampled function: {0}")]
    InvalidSampledFn(String),
    #[error("problem callable not finite at t = {t}: {detail}")]
    EvaluationDomainError { t: f64, detail: String },
    #[error("Pontryagin function unbounded above along a ray at t = {t} (|u| = {radius})")]
    UnboundedAboveDetected { t: f64, radius: f64 },
    #[error("integration blew up at t = {t}")]
    IntegrationBlowup { t: f64 },
    #[error("integrand tail not settled at T_max (tail estimate {tail})")]
    TailNotSettled { tail: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("no multiplier found: {0}")]
    NoMultiplierFound(String),
    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),
    #[error("parameter constraint violated: {0}")]
    ParameterConstraintViolated(String),
    #[error("unknown catalog entry '{0}'")]
    UnknownProblem(String),
    #[error("unknown parameter '{param}' for catalog entry '{entry}'")]
    UnknownParameter { entry: String, param: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("CSV error: {0}")]
    Csv(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
