use thiserror::Error;

use crate::data::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value evaluating constraint {col} at observation {row}")]
    Evaluation { row: usize, col: usize },

    #[error("constraint set is already centered")]
    AlreadyCentered,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("target is not in the convex hull of the constraint evaluations")]
    InfeasibleConstraints,

    #[error("rank condition fails: rank [1 | G] = {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("all constraint columns are zero")]
    DegenerateConstraints,

    #[error(
        "no convergence after iterations={} (grad_norm={:e}, residual={:e})",
        .report.iterations, .report.grad_norm, .report.residual
    )]
    NoConvergence { report: Box<SolveReport> },

    #[error("empirical variance is singular (min eigenvalue {min_eig:e}, max eigenvalue {max_eig:e})")]
    SingularVariance { min_eig: f64, max_eig: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name, used as the first token of CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Evaluation { .. } => "EvaluationError",
            Error::AlreadyCentered => "AlreadyCentered",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InfeasibleConstraints => "InfeasibleConstraints",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DegenerateConstraints => "DegenerateConstraints",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularVariance { .. } => "SingularVariance",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::Numerical(_) => "NumericalError",
            Error::Domain(_) => "DomainError",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
