//! Numerical toolkit for free multiplicative convolution on the positive half-line.
//!
//! The library evaluates the moment transform ψ, its inverse χ, and Voiculescu's
//! S-transform of a measure on [0,∞) as real functions on the negative axis,
//! combines S-transforms (products and convolution powers `t ≥ 1`), and converts
//! between tail asymptotics and S-transform asymptotics in both directions:
//!
//! * [`measure`] — measure descriptions, moments, tails, pushforwards, sampling;
//! * [`transforms`] — ψ/χ/S evaluation and derivatives, closed forms, handles;
//! * [`free_mult`] — S-transform combination, ψ of a combination, Breiman factors;
//! * [`regvar`] — slowly varying algebra, regular-variation fits, Π-class tests,
//!   tail prediction for convolution powers, and tail estimation from an S-handle;
//! * [`id_laws`] — ⊠-infinitely-divisible laws parameterized by (γ, σ);
//! * [`matrix_mc`] — Monte Carlo cross-checks with products of randomly rotated
//!   matrices, plus a Hill tail-index fit;
//! * [`scenarios`] — the named verification scenarios behind `freemult verify`.
//!
//! Everything is pure and reentrant: measures, handles and Lévy pairs are
//! immutable after construction and safe to share across threads.

// Guards of the form `!(x >= 0.0)` are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod free_mult;
pub mod id_laws;
pub mod matrix_mc;
pub mod measure;
pub mod quad;
pub mod regvar;
pub mod scenarios;
pub mod transforms;

pub use error::Error;
pub use measure::{ExtendedMoment, MeasureSpec};
pub use regvar::{LogPowerSv, RegVarFit, Regime, TailAsymptotic};
pub use transforms::STransformHandle;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
