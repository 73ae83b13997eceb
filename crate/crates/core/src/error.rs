//! Error types shared across the crate.

/// Failure modes of the lab operations.
///
/// Operations declare supported ranges and reject inputs outside them
/// instead of silently wrapping or truncating.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Input outside the declared supported range.
    #[error("out of supported range: {0}")]
    Range(String),

    /// Input violates a mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two routes that must agree did not; never silently ignored.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A numeric method failed to converge to its target accuracy.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A sieve density degenerated (`omega(p) >= p`): `g(p)` is undefined.
    #[error("sieve-degenerate context: {0}")]
    SieveDegenerate(String),

    /// A local density in a denominator vanished.
    #[error("singular density: {0}")]
    SingularDensity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
