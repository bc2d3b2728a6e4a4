use thiserror::Error;

use crate::penalty::PenaltyFamily;

/// Errors surfaced by solvers, path construction, and selectors.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid penalty specification: {0}")]
    InvalidPenalty(String),

    #[error("operation expects {expected:?} penalty, got {got:?}")]
    FamilyMismatch {
        expected: PenaltyFamily,
        got: PenaltyFamily,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("design column {col} has norm {norm}, expected unit length")]
    NotNormalized { col: usize, norm: f64 },

    #[error("reduced {size}x{size} system is not positive definite (even after ridge lift)")]
    SingularReducedSystem { size: usize },

    #[error("active set size {active} exceeds cap {cap}; lambda too small for identifiability")]
    OversizedActiveSet { active: usize, cap: usize },

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("X'y is zero: no signal to build a lambda grid from")]
    EmptySignal,

    #[error("no path point has a support size in 1..=cap; nothing to select")]
    NoNonzeroSolution,

    #[error("path holds no points")]
    EmptyPath,
}

pub type Result<T> = std::result::Result<T, Error>;
