//! Linear regression with stationary, serially correlated errors.
//!
//! The crate covers the full pipeline for studying generalized least squares
//! under a hypothesized (possibly wrong) error model:
//!
//! * [`processes`] — error-process specification: linear filters over i.i.d.
//!   innovations, AR models, autocovariance sequences, spectral densities,
//!   and exact reproducible simulation.
//! * [`toeplitz`] — Toeplitz covariance matrices, their Levinson-Durbin
//!   triangular factorization, inverse application, and induced norms.
//! * [`design`] — fixed regressor designs, column scaling, sample correlation
//!   limits, spectral measures for the built-in design library, and
//!   Grenander-condition diagnostics.
//! * [`estimators`] — OLS, time-domain GLS with a hypothesized covariance,
//!   the frequency-domain analogue built on periodograms, and feasible GLS
//!   with AR coefficients fitted from residuals.
//! * [`asymptotics`] — the sandwich asymptotic covariance computed by matrix
//!   limit and by spectral integral, plus a deterministic Monte Carlo harness
//!   with normality reporting.
//!
//! All operations are pure functions of their inputs; simulation takes
//! explicit seeds and derives per-replicate streams counter-style, so results
//! are independent of thread count.

pub mod asymptotics;
pub mod design;
mod error;
pub mod estimators;
pub mod processes;
pub(crate) mod rng;
pub mod toeplitz;

pub use error::{Error, Result};

/// Number of grid points used for frequency-domain validity checks.
pub const FREQ_GRID: usize = 4096;
