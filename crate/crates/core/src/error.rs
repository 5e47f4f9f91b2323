use thiserror::Error;

/// Everything that can go wrong while building or analysing mechanisms.
///
/// Row and entry positions carried by variants are zero-based; the
/// `Display` output reports them one-based to match how users count rows
/// in their input files.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("TooShort: need at least 2 symbols, got {len}")]
    TooShort { len: usize },

    #[error("NonPositiveEntry index={} value={value}", .index + 1)]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("NotNormalized: entries sum to {sum}")]
    NotNormalized { sum: f64 },

    #[error("RowNotStochastic row={} sum={sum}", .row + 1)]
    RowNotStochastic { row: usize, sum: f64 },

    #[error("NotRectangular: row {} has {got} entries, expected {expected}", .row + 1)]
    NotRectangular {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("NegativeGamma: {0}")]
    NegativeGamma(f64),

    #[error("InvalidBudget: {0}")]
    InvalidBudget(String),

    #[error("SchemaError: {0}")]
    Schema(String),

    #[error("InvalidSegment: {0}")]
    InvalidSegment(String),

    #[error("EmptyVector")]
    EmptyVector,

    #[error("EmptySet")]
    EmptySet,

    #[error("IndexOutOfRange: {index} not in 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("LengthMismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("DimensionMismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("NotSquare: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("BudgetExceedsAlphabet: e^gamma = {exp_gamma} > n = {n}")]
    BudgetExceedsAlphabet { exp_gamma: f64, n: usize },

    #[error("InfeasibleCompletion: {0}")]
    InfeasibleCompletion(String),

    #[error("NumericalBreakdown: {0}")]
    NumericalBreakdown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
