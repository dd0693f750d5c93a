use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expected a nonempty collection")]
    EmptyCollection,

    #[error("expected a nonempty bundle")]
    EmptyBundle,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("envy graph contains a cycle")]
    CyclicGraph,

    #[error("subchain vertex {0} has no associated agent")]
    FreeInteriorVertex(usize),

    #[error("table valuation has no entry for bundle {0}")]
    MissingTableEntry(String),

    #[error("enumeration would need {needed} assignments, budget is {budget}")]
    InstanceTooLarge { needed: u128, budget: u64 },

    #[error("no full MXS+EFL association function exists for this partition")]
    NoFairAssociation,

    #[error("iteration cap exceeded in {0}; this indicates an implementation bug")]
    IterationCapExceeded(&'static str),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("valuation is not restricted MMS-feasible: {0}")]
    NotRestrictedMmsFeasible(String),

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
