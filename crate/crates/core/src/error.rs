//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Attempted to invert zero in GF(q).
    #[error("division by zero in GF({q})")]
    ZeroInverse { q: u64 },

    /// Two values from incompatible fields or groups were combined.
    #[error("mismatched contexts: {0}")]
    ContextMismatch(String),

    /// Matrix or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A square system had no unique solution.
    #[error("matrix is singular")]
    Singular,

    /// A linear system had no solution at all.
    #[error("linear system is inconsistent")]
    Inconsistent,

    /// A selector's row set is not preserved by the requested operator, so no
    /// restricted matrix exists.
    #[error("selector rows are not invariant under the operator")]
    InvarianceViolation,

    /// Caller-supplied parameters violate a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Greedy word search ran out of candidates before reaching the target size.
    #[error("code capacity exhausted: requested {requested} words, found {achieved}")]
    Capacity { requested: usize, achieved: usize },

    /// More erasures than the code can tolerate.
    #[error("cannot recover from {erased} erasures (at most {max})")]
    TooManyErasures { erased: usize, max: usize },

    /// A condition the construction guarantees failed to hold; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
