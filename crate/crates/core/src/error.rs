use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method failed or produced an unusable result.
    #[error("numeric error: {message} (residual {residual:.3e})")]
    Numeric { message: String, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The synthesis problem has no solution under the given constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("fit error: {message} (residual norm {residual:.3e})")]
    Fit { message: String, residual: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { message: msg.into(), residual }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Numeric { .. } => "numeric",
            Error::Unsupported(_) => "unsupported",
            Error::Infeasible(_) => "infeasible",
            Error::Fit { .. } => "fit",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
            Error::Numeric { .. } | Error::Fit { .. } => 3,
            Error::Infeasible(_) => 4,
            Error::Io(_) => 5,
        }
    }
}
