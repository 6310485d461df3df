use thiserror::Error;

use crate::power::PowerSplit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function or model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or continued fraction did not reach its tolerance within the term budget.
    #[error("accuracy error: {what} did not converge within {terms} terms")]
    Accuracy { what: &'static str, terms: usize },

    #[error("shape error: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    Shape {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    /// The power-allocation solver stopped early; the best feasible iterate is attached.
    #[error("optimization did not converge after {iterations} iterations")]
    Optimization { iterations: usize, best: PowerSplit },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
