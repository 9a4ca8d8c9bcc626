//! Link-level analysis of diffusion-based molecular communication with a
//! tagged transmitter, a fully-absorbing spherical receiver and a Poisson
//! field of interfering transmitters sending independent random bits.
//!
//! Closed-form channel responses, expected counts and error probabilities
//! live next to a Monte Carlo simulator of the same model, so every analytic
//! quantity can be checked against an independent estimate.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Constants and
// reference values keep all published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod ber_analytic;
pub mod channel;
pub mod error;
pub mod expectations;
pub mod experiments;
pub mod montecarlo;
pub mod numerics;
pub mod pointfield;

pub use error::{Error, Result};
