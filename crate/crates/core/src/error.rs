//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Construction-time validation failure (distributions, specs, samples).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Operands that cannot be combined: loss vs. point variant, hypothesis vs.
    /// loss, mismatched dimensions.
    #[error("incompatible operands: {0}")]
    Mismatch(String),

    /// A solver has no minimizer for the given sample (e.g. the variance
    /// estimator on an all-zero sample).
    #[error("fit failed: {0}")]
    Fit(String),

    /// The composition enumeration for (n, k) would exceed the engine cap.
    #[error("composition capacity exceeded at n={n}, k={k}: {needed} compositions (cap {cap})")]
    Capacity {
        n: u32,
        k: usize,
        needed: u128,
        cap: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        Error::Mismatch(msg.into())
    }

    pub fn fit(msg: impl Into<String>) -> Self {
        Error::Fit(msg.into())
    }

    pub fn is_fit(&self) -> bool {
        matches!(self, Error::Fit(_))
    }
}
