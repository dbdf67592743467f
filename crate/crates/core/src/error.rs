use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A pattern or table count exceeded its cap. `count` is the exact count
    /// when it could be computed, otherwise a lower estimate.
    #[error("{what}: count {count} exceeds cap {cap}")]
    ResourceCap { what: String, count: u128, cap: u128 },

    #[error("evaluation failed on {set}: {message}")]
    Evaluation { set: String, message: String },

    #[error("not asymptotically additive at tolerance {tol:e}: gap {gap:e}")]
    NotAsymptoticallyAdditive { gap: f64, tol: f64 },

    #[error(
        "Cauchy violation between eps={eps_a:e} and eps={eps_b:e}: \
         quotient distance {distance:e} exceeds bound {bound:e}"
    )]
    CauchyViolation {
        eps_a: f64,
        eps_b: f64,
        distance: f64,
        bound: f64,
    },

    #[error("transfer matrix is reducible; Perron vector is not unique")]
    Reducible,

    #[error("measure support mismatch: {0}")]
    SupportMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
