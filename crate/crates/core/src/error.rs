use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure classes. [`Error::class`] maps each onto the CLI exit status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("accuracy error: {what} (relative change {change:.3e} between {nodes} and {} nodes)", 2 * nodes)]
    Accuracy {
        what: String,
        change: f64,
        nodes: usize,
    },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("singular block at degree {degree}: kernel spanned by {kernel}")]
    SingularBlock { degree: usize, kernel: String },

    #[error("form is not closed: component {component} of the derivative is {value:e}")]
    NotClosed { component: String, value: f64 },

    #[error("operator not self-adjoint on degree {degree} block: asymmetry {asymmetry:.3e}")]
    NotSelfAdjoint { degree: usize, asymmetry: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Coarse error class used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Accuracy,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Accuracy { .. }
            | Error::Divergent(_)
            | Error::NoConvergence { .. }
            | Error::Invariant(_) => ErrorClass::Accuracy,
            _ => ErrorClass::Domain,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
