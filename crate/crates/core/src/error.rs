use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range the operation is defined on.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The requested θ is below the smallest value the float routines support.
    #[error("theta = {theta} is below the precision floor {floor}")]
    PrecisionFloor { theta: f64, floor: f64 },

    /// A memory or size guard refused the request.
    #[error("resource guard tripped: {0}")]
    ResourceGuard(String),

    /// A root or threshold could not be bracketed.
    #[error("no root found: {0}")]
    NoRoot(String),

    /// A scan found the defining inequality satisfied and then violated again.
    #[error("non-monotone window: {0}")]
    NonMonotone(String),

    /// A simulation hit its frontier cap where truncation invalidates the result.
    #[error("frontier cap of {cap} reached at generation {generation}")]
    Truncated { cap: usize, generation: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects anything that is not a finite number inside `[lo, hi]`.
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} not in [{lo}, {hi}]")))
    }
}
