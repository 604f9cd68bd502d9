//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Failure modes of measure construction, transform evaluation, fitting and
/// Monte Carlo runs.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The requested quantity has no implemented representation for this
    /// measure family (e.g. the distribution function of `MuAlphaBeta`).
    #[error("not available: {0}")]
    NotAvailable(String),

    /// A pushforward by x ↦ 1/x was requested for a measure with an atom at 0.
    #[error("measure has an atom at zero (mass {0})")]
    AtomAtZero(f64),

    /// The adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Argument outside the domain of the transform.
    #[error("argument {arg} outside ({lo}, {hi})")]
    OutOfRange { arg: f64, lo: f64, hi: f64 },

    /// Derivative order above what the evaluator propagates.
    #[error("derivative order {0} too high (max {1})")]
    OrderTooHigh(usize, usize),

    /// Unknown closed-form tag.
    #[error("unknown closed-form tag: {0}")]
    UnknownTag(String),

    /// Convolution powers below one are not defined here.
    #[error("exponent {0} below one")]
    ExponentBelowOne(f64),

    /// Monotone inversion could not bracket the target value.
    #[error("no bracket: {0}")]
    NoBracket(String),

    /// The supplied asymptotic parameters do not match the requested regime.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// α = 1 left-tail declarations need the limit of the slowly varying part.
    #[error("missing limit: {0}")]
    MissingLimit(String),

    /// The handle does not look regularly varying on the grid.
    #[error("not regularly varying: {0}")]
    NotRegularlyVarying(String),

    /// Automatic regime selection could not decide.
    #[error("ambiguous regime: {0}")]
    AmbiguousRegime(String),

    /// A fitter was given a non-positive value where a log is needed.
    #[error("non-positive value {value} at grid point {x}")]
    NonPositiveValue { x: f64, value: f64 },

    /// A slowly varying expression was evaluated below its domain threshold.
    #[error("argument {arg} below domain threshold {threshold}")]
    DomainTooSmall { arg: f64, threshold: f64 },

    /// Hill fit with too few samples for the requested order statistics.
    #[error("too few samples: k = {k}, n = {n}")]
    TooFewSamples { k: usize, n: usize },

    /// The symmetric eigensolver failed to converge.
    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),

    /// Malformed measure or Lévy-pair description.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
