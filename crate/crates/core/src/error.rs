//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Vector lengths disagree with the ambient signature.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A chart was evaluated outside its parameter domain.
    #[error("parameter point outside chart domain on axis {axis}: {value} not in ({lo}, {hi})")]
    OutsideDomain {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A chart map returned NaN or infinity.
    #[error("chart map produced non-finite values at {context}")]
    NonFiniteEvaluation { context: String },

    /// First partials do not span an n-plane.
    #[error("degenerate immersion: metric is not positive definite ({detail})")]
    DegenerateImmersion { detail: String },

    /// A linear solve or eigensolve lost too much precision.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Shape parameters outside their documented range.
    #[error("invalid shape parameter: {0}")]
    Parameter(String),

    /// Requested quadrature grid exceeds the node budget.
    #[error("quadrature budget exceeded: {requested} nodes > cap {cap}")]
    BudgetExceeded { requested: usize, cap: usize },

    /// Calibration system is unusable (bad radii, ill conditioning).
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Checker invoked without required inputs (e.g. missing constants).
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
