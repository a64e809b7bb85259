//! One error enum for the whole crate.
//!
//! Checks whose *negative outcome is data* (a failed PSD check, an
//! incomplete kernel, a non-robust inequality) report it through their
//! return type, with witnesses. `Error` is reserved for guard violations,
//! malformed inputs, and conditions that make the requested computation
//! meaningless.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable-count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter out of range: {0}")]
    Guard(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("solution set is empty")]
    EmptySolutionSet,

    #[error("solution set is not finite-enumerable")]
    NotEnumerable,

    #[error("polynomial is outside the basis span: contains {0}")]
    OutsideBasisSpan(String),

    #[error("polynomial is not in the ideal; residue {0}")]
    NotInIdeal(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("richness report is stale: {0}")]
    StaleReport(String),

    #[error("exact linear system infeasible: {0}")]
    Infeasible(String),

    #[error("exact PSD check failed: {0}")]
    PsdFailed(String),

    #[error("construction self-check failed: {0}")]
    SelfCheck(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
