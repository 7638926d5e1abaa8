//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures surfaced by the library.
///
/// Variants named after an internal cross-check (`InternalMismatch`,
/// `NotIntegral`, `AlgorithmMismatch`) indicate a bug rather than bad input
/// and are reported loudly instead of being papered over.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands live in different rings.
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    /// Parameters outside the documented domain of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// `reconstruct` was given a pair whose reductions mod p disagree.
    #[error("pair is not compatible: its two reductions mod p differ")]
    NotCompatible,
    /// Exact division in the cyclotomic field produced a non-integral quotient.
    #[error("exact division produced a non-integral result: {0}")]
    NotIntegral(String),
    /// Element expected to be a unit is not one.
    #[error("element is not a unit: {0}")]
    NotAUnit(String),
    /// A zero element was passed where a valuation is required.
    #[error("valuation of zero is undefined")]
    ZeroInput,
    /// Discrete logarithm requested for an element outside the basis span.
    #[error("element is not in the span of the basis: {0}")]
    NotInSpan(String),
    /// Expected divisibility by p failed.
    #[error("not divisible by p: {0}")]
    NotDivisible(String),
    /// Two independent constructions of the same value disagree.
    #[error("internal cross-check failed: {0}")]
    InternalMismatch(String),
    /// The two Bernoulli algorithms disagree.
    #[error("Bernoulli algorithms disagree at index {index} for p = {p}")]
    AlgorithmMismatch { p: u64, index: u64 },
    /// The requested computation exceeds the supported scale.
    #[error("unsupported scale: {0}")]
    UnsupportedScale(String),
    /// The echelon pivot set was not shown to be stable.
    #[error("saturation unverified: {0}")]
    SaturationUnverified(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
