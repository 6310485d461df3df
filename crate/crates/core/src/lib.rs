//! Outage analysis of selective decode-and-forward MIMO-OSTBC relaying over
//! time-selective Rayleigh fading with imperfect channel knowledge.
//!
//! - [`specfun`]: Bessel J0, log-gamma, incomplete gamma, Kummer ₁F₁
//! - [`fading`]: Jakes correlation, AR(1) channel evolution, effective-SNR factors
//! - [`gammasum`]: distribution of a sum of independent Gamma variates
//! - [`outage`]: closed-form per-block average outage and its high-SNR forms
//! - [`power`]: source/relay power allocation
//! - [`mcsim`]: Monte Carlo reference estimator
//! - [`cli`]: configuration files, sweeps and reports behind the binary

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fading;
pub mod gammasum;
pub mod mcsim;
pub mod outage;
pub mod power;
pub mod specfun;

pub use error::{Error, Result};
