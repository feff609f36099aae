use thiserror::Error;

use crate::dsl::DslError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The asymptotic formulas are only claimed for α, β ≥ -1/2.
    #[error("outside stated validity: {0}")]
    OutsideValidity(String),

    #[error("{method}: matrix not positive definite at requested precision (index {index})")]
    NotPositiveDefinite { method: &'static str, index: usize },

    #[error("{what} failed to converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Perturbation(#[from] DslError),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures caused by exhausted precision or non-convergence,
    /// as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::Convergence { .. } | Error::NonFinite(_)
        )
    }
}
