//! Core numerics for a stochastic volatility model with fractional
//! Ornstein–Uhlenbeck log-variance and subordinator-driven variance jumps.
//!
//! The crate is `no_std` (with `alloc`) and covers:
//!
//! * [`gaussian`]: fractional Brownian motion covariance, exact samplers and
//!   Gaussian-integral helpers.
//! * [`fou`]: the fractional Ornstein–Uhlenbeck log-variance factor.
//! * [`levy`]: subordinator families and moments of OU-weighted jump integrals.
//! * [`pricing`]: variance and volatility swaps plus Heston and classical
//!   BN-S benchmarks.
//! * [`hedging`]: conditional laws, price decomposition and the quadratic
//!   hedge ratio.
//! * [`montecarlo`]: full-model path simulation used as an oracle.
//! * [`backtest`]: rolling-window realized-variance forecasts and error metrics.
//!
//! Time is measured in trading days throughout.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod backtest;
mod error;
pub mod fou;
pub mod gaussian;
pub mod hedging;
pub mod levy;
pub mod linalg;
pub mod montecarlo;
pub mod pricing;
pub mod quad;
pub mod rng;
pub mod sobol;
mod sobol_table;
pub mod special;

pub use error::{Error, Result};
