use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A score row violates its invariants (length, finiteness).
    #[error("invalid row {row}: {reason}")]
    InvalidRow { row: String, reason: String },

    /// An argument lies outside the operation's domain (negative t, β ≤ 0, r > log n, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The row has no competitors (n = 1), so the quantity is undefined.
    #[error("degenerate row: no competitor gaps")]
    Degenerate,

    /// The row has ties at the maximum, so Λ is infinite.
    #[error("tied row: {n_max} scores share the maximum")]
    Tied { n_max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min:e}, tolerance {tol:e})")]
    NotPsd { min: f64, tol: f64 },

    #[error("numerical rank {rank} exceeds d_qk = {d_qk}")]
    Rank { rank: usize, d_qk: usize },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn estimation(msg: impl Into<String>) -> Self {
        Error::Estimation(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }

    /// Process exit code for the command-line surface: 2 for estimation failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Estimation(_) => 2,
            _ => 1,
        }
    }
}
