use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A user-facing parameter is out of its admissible range.
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    /// A numerical routine did not reach the requested accuracy.
    #[error("accuracy failure in {routine}: {reason} (achieved estimate {estimate:e})")]
    Accuracy {
        routine: &'static str,
        reason: String,
        estimate: f64,
    },

    /// Adaptive ODE integration could not continue.
    #[error("integration failed at abscissa {at}: {reason}")]
    Integration { at: f64, reason: String },

    /// Root bracketing or refinement failed.
    #[error("root search failed in {func}: {reason}")]
    Bracket { func: &'static str, reason: String },

    #[error("invalid path index (N1={n1}, N2={n2}): {reason}")]
    Index { n1: f64, n2: u32, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// Enumeration exceeded its configured cap.
    #[error("resource limit: {reason} (cap {cap}, tail bound {tail_bound:e})")]
    Resource {
        reason: String,
        cap: usize,
        tail_bound: f64,
    },

    #[error("requested time {requested} exceeds the validated horizon {horizon}; raise the delay cutoff")]
    Horizon { requested: f64, horizon: f64 },

    #[error("ill-conditioned linear system: {0}")]
    Conditioning(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            func,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
