//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by network construction, counters, likelihoods, and
/// selection.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("adjacency matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },

    #[error("diagonal entry x[{i}][{i}] = {value} is odd; the diagonal stores twice the self-loop count")]
    OddDiagonal { i: usize, value: u64 },

    #[error("label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration budget exceeded: {k}^{n} label vectors > budget {budget}")]
    BudgetExceeded { k: usize, n: usize, budget: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("network has an entry above log(n): x[{i}][{j}] = {value}")]
    OutsideOmega { i: usize, j: usize, value: u64 },

    #[error("exact evidence is infeasible for k in {0:?} under the current budget; use the bracket backend or allow_partial")]
    InfeasibleOrders(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, Error>;
