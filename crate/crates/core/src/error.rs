use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// Each variant maps onto one process exit code of the `qexp` binary, see
/// [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("size overflow: {0}")]
    SizeOverflow(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative beta0 = {0}: expansion too weak for guarantee mode")]
    NegativeBeta(String),

    #[error("syndrome is not in the column space of the parity-check matrix")]
    UnreachableSyndrome,

    #[error("infeasible noise knobs: {0}")]
    InfeasibleKnobs(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("replay mismatch at step {step}: {condition}")]
    ReplayMismatch { condition: String, step: usize },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 usage, 3 domain, 4 budget, 5 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::DimensionMismatch(_)
            | Error::Unsatisfiable(_)
            | Error::Domain(_)
            | Error::NegativeBeta(_)
            | Error::UnreachableSyndrome
            | Error::InfeasibleKnobs(_)
            | Error::PreconditionViolated(_) => 3,
            Error::BudgetExceeded(_) | Error::SizeOverflow(_) => 4,
            Error::ReplayMismatch { .. } | Error::InvariantViolation(_) => 5,
        }
    }

    /// Stable machine-readable tag for CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Unsatisfiable(_) => "Unsatisfiable",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::SizeOverflow(_) => "SizeOverflow",
            Error::Domain(_) => "DomainError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NegativeBeta(_) => "NegativeBeta",
            Error::UnreachableSyndrome => "UnreachableSyndrome",
            Error::InfeasibleKnobs(_) => "InfeasibleKnobs",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::ReplayMismatch { .. } => "ReplayMismatch",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
