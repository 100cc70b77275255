use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is numerically singular ({context}): condition estimate {cond:.3e}")]
    SingularMatrix { context: String, cond: f64 },

    #[error("block-Hankel moment system is numerically singular at degree {degree}: condition estimate {cond:.3e}")]
    SingularMoment { degree: usize, cond: f64 },

    #[error("moment of order {k} diverges for s = {s} (integrand not integrable at the origin)")]
    DivergentMoment { k: i64, s: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("ODE integration failed at s = {s_last_good}: {reason}")]
    StepFailure { s_last_good: f64, reason: String },

    #[error("bootstrap diverged at degree {degree}: relative deviation {deviation:.3e}")]
    IterationDiverged { degree: usize, deviation: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("spec parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Variant name, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::SingularMoment { .. } => "SingularMoment",
            Error::DivergentMoment { .. } => "DivergentMoment",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DegenerateParameters(_) => "DegenerateParameters",
            Error::StepFailure { .. } => "StepFailure",
            Error::IterationDiverged { .. } => "IterationDiverged",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::Json(_) => "Json",
        }
    }

    /// Structural errors are the ones the CLI reports with exit code 2.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::SingularMoment { .. }
                | Error::DivergentMoment { .. }
                | Error::StepFailure { .. }
                | Error::IterationDiverged { .. }
                | Error::DegenerateParameters(_)
        )
    }
}
