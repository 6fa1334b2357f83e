use thiserror::Error;

use crate::orbit::SearchResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis is singular (|det| = {det:e})")]
    SingularBasis { det: f64 },

    #[error("dimension {0} is outside the supported range 2..=8")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("log coordinates must sum to zero (sum = {0:e})")]
    NotTraceZero(f64),

    #[error("enumeration visited more than {cap} candidates")]
    EnumerationBudgetExceeded { cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice is not well-rounded")]
    NotWellRounded,

    #[error("lattice is not generic well-rounded")]
    NotGenericWR,

    #[error("vectors have rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("multi-index entry {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("every size-{d} minor is below the singularity threshold; retry with rational input")]
    NumericallySingularMinor { d: usize },

    #[error("invalid flag: {0}")]
    InvalidFlag(String),

    #[error("no sampled diagonal element lies in the sublevel set")]
    EmptySublevelSet,

    #[error("{0} is not a squarefree integer >= 2")]
    NotSquarefree(i64),

    #[error("fundamental unit of Z[sqrt({0})] overflows 128-bit arithmetic")]
    UnitOverflow(i64),

    #[error("evaluation budget exhausted (best spread {:.6e})", .0.spread)]
    BudgetExhausted(Box<SearchResult>),

    #[error("grid point {point:?} is not covered by any element")]
    NotACover { point: Vec<f64> },

    #[error("cover element `{0}` is unbounded")]
    UnboundedElement(String),

    #[error("G_{i} and G_{j} meet outside Z at {point:?}")]
    HypothesisViolated { i: usize, j: usize, point: Vec<f64> },

    #[error("unfolding window of half-width {0} does not contain a full reflection tile")]
    WindowTooSmall(f64),

    #[error("element `{element}` meets face {face} of simplex factor {factor} it was declared to miss")]
    DeclarationFalse { element: String, factor: usize, face: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
