use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Instance file failed validation; `path` names the offending JSON location.
    #[error("invalid instance at `{path}`: {message}")]
    InvalidInstance { path: String, message: String },

    /// Run configuration failed to parse or validate.
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("MWU horizon of {horizon} rounds exceeded")]
    HorizonExceeded { horizon: usize },

    #[error("loss {value} of expert {expert} at round {round} lies outside window [{lo}, {hi}]")]
    WidthViolation {
        round: usize,
        expert: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("k = {k} exceeds the exhaustive subset limit of {limit}")]
    TooManyDistributions { k: usize, limit: usize },

    #[error("instance too large for {what}: {detail}")]
    TooLarge { what: &'static str, detail: String },

    /// The filter removed every hypothesis. Signals `opt_prime` below OPT - eps
    /// with high probability.
    #[error("no hypothesis survived filtering at round {round} (opt_prime = {opt_prime})")]
    EmptySurvivors { round: usize, opt_prime: f64 },

    #[error("oracle contract violated: {0}")]
    OracleContract(String),

    #[error("learner assumption violated: {0}")]
    Assumption(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from bad input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidInstance { .. } | Error::Json(_) | Error::InvalidArgument(_)
        )
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid_instance(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInstance {
            path: path.into(),
            message: message.into(),
        }
    }
}
