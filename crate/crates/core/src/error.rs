use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-integrable step function (tail levels {left} and {right})")]
    NonIntegrable { left: f64, right: f64 },

    #[error("invalid distance exponent p = {0}; need 1 <= p <= inf")]
    InvalidExponent(f64),

    #[error("invalid mixture parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate locations: |a1 - a2|^2 = {0:e}")]
    DegenerateLocations(f64),

    #[error("non-invertible mixing matrix: lambda1 = {0} is too close to 1/2")]
    NonInvertibleMixing(f64),

    #[error("unsupported number of components k = {0}")]
    UnsupportedK(usize),

    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("every start failed to produce a finite objective")]
    AllStartsFailed,

    #[error("search grid too large: {candidates} candidates (cap {cap})")]
    GridTooLarge { candidates: u128, cap: u128 },

    #[error("bootstrap failed on {failures} of {resamples} resamples; first error: {first_error}")]
    BootstrapFailed {
        failures: usize,
        resamples: usize,
        first_error: String,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
