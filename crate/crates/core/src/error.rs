use thiserror::Error;

/// Broad category of a failure, used by front ends to pick exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input could not be turned into a well-formed object.
    Parse,
    /// The object is well-formed but violates a structural invariant.
    Validation,
    /// A mathematical precondition of an operation does not hold.
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph document: {0}")]
    Document(#[from] serde_json::Error),

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("plaquette `{id}` does not close: its signed boundary leaves vertex `{vertex}` with net {net}")]
    OpenPlaquette {
        id: String,
        vertex: String,
        net: i64,
    },

    #[error("{what}: expected length/shape {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error(
        "source vector has a component {component:e} along the null space of K (|J| = {norm:e}); \
         J must be divergence-free so that the integral is restricted to the row space and \
         no gauge-volume infinity appears"
    )]
    NotInRowSpace { component: f64, norm: f64 },

    #[error("mode {0} lies in the null space of K and carries no probability density")]
    NullMode(usize),

    #[error("mode index {index} out of range for {len} modes")]
    ModeOutOfRange { index: usize, len: usize },

    #[error(
        "K is singular ({null_count} zero modes); the full-space partition function is undefined"
    )]
    Singular { null_count: usize },

    #[error("quadrature over {rank} row-space axes exceeds the limit of {max}; use the analytic partition function")]
    RankTooLarge { rank: usize, max: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Document(_) | Error::MalformedGraph(_) => ErrorKind::Parse,
            Error::OpenPlaquette { .. }
            | Error::DimensionMismatch { .. }
            | Error::NonFinite(_)
            | Error::InvalidParameter(_)
            | Error::NotSymmetric(_) => ErrorKind::Validation,
            Error::NoConvergence { .. }
            | Error::NotInRowSpace { .. }
            | Error::NullMode(_)
            | Error::ModeOutOfRange { .. }
            | Error::Singular { .. }
            | Error::RankTooLarge { .. } => ErrorKind::Precondition,
        }
    }

    pub(crate) fn dims(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
