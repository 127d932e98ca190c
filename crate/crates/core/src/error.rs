use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Domain construction or geometry violation (degenerate bounds,
    /// ε out of (0, ε₀], point outside the closure, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// Time arguments out of order or outside (0,T).
    #[error("time error: {0}")]
    Time(String),

    /// Measure admissibility violation (negative mass, divergent
    /// δ-weighted mass, horizon mismatch, …).
    #[error("measure error: {0}")]
    Measure(String),

    /// Quadrature failed to converge or produced a non-finite value.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A limit procedure failed to converge within its schedule.
    #[error("non-convergent limit: {0}")]
    NonConvergent(String),

    /// Operation is outside the supported class (e.g. trace extraction
    /// on the rectangle).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Input file violates the measure or config schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Requested tolerance cannot be certified by the available error
    /// estimates.
    #[error("tolerance unachievable: {0}")]
    ToleranceUnachievable(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
