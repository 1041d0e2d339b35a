use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// Validation failures carry a human-readable explanation of which input
/// was rejected; size guards report both the requested and the permitted
/// size so callers can decide whether to retry with a larger guard.
#[derive(Debug, Error)]
pub enum Error {
    /// Reading or writing a file failed before any parsing began.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file or string could not be parsed at all (malformed JSON,
    /// malformed rational literal, unknown cost type, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// The input parsed but violates a structural invariant
    /// (negative mass, duplicate support point, unbalanced totals, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Two objects that must agree on dimensions do not
    /// (plan shape vs. instance shape, point dimension mismatch, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An exhaustive procedure was asked to run beyond its size guard.
    #[error("instance too large for {operation}: size {size} exceeds guard {guard}")]
    InstanceTooLarge {
        operation: &'static str,
        size: usize,
        guard: usize,
    },

    /// A plan that was required to be optimal is not (or the supplied
    /// certificate does not prove it optimal).
    #[error("plan is not optimal: {0}")]
    NotOptimal(String),

    /// Decomposition requires an acyclic support; the plan has a cycle.
    #[error("support contains a cycle through ({row}, {col}); reduce the plan first")]
    CyclicSupport { row: usize, col: usize },

    /// An operation that needs at least one plan entry received none.
    #[error("plan has no entries")]
    EmptyPlan,

    /// An operation that needs at least one diffusive atom received a
    /// model whose diffusive parts are both empty.
    #[error("model has no diffusive atoms")]
    EmptyModel,

    /// An exponent parameter is outside its admissible range.
    #[error("invalid exponent p: {0}")]
    InvalidP(String),
}

pub type Result<T> = std::result::Result<T, Error>;
