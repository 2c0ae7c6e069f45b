use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A transform was evaluated outside its domain (e.g. a non-positive density).
    #[error("{function}: density {rho} is outside the domain rho > 0")]
    Domain { function: &'static str, rho: f64 },

    #[error("{function}: exponent alpha = {alpha} is not supported (requires alpha != 1/2)")]
    UnsupportedExponent { function: &'static str, alpha: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A field violates the vacuum guard or contains non-finite values.
    #[error("invalid state at cell {index}: {reason}")]
    State { index: usize, reason: String },

    #[error("vacuum breach at cell {index}: density {rho} below floor {floor} (t = {t})")]
    VacuumBreach {
        index: usize,
        rho: f64,
        floor: f64,
        t: f64,
    },

    #[error("scenario violates its hypotheses: {}", .0.join("; "))]
    Scenario(Vec<String>),

    #[error("configuration error: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<FieldError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A validation failure attached to one configuration key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub key: String,
    pub message: String,
}

impl FieldError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}
