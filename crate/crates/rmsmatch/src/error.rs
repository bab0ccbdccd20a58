use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("halfplane intersection is empty or has no interior")]
    EmptyIntersection,
    #[error("index {k} out of range: only {count} intersections inside the slab")]
    OutOfRange { k: usize, count: usize },
    #[error("translation lies on a boundary of the subdivision")]
    OnBoundary,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("a preference list was exhausted before every agent was served")]
    ListExhausted,
    #[error("separation inequality fails for l={l}, k={k}")]
    SeparationViolated { l: u64, k: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
