//! Exact support recovery in sparse signal-plus-noise models.
//!
//! Observations follow `x = mu + eps` where `mu` is sparse and `eps` is a
//! (possibly dependent) noise vector. This crate provides the pieces needed
//! to study when thresholding estimators recover the support of `mu`
//! exactly:
//!
//! * [`tail_models`]: marginal error laws, quantiles and samplers.
//! * [`boundaries`]: closed-form phase-transition curves.
//! * [`procedures`]: support estimators and recovery metrics.
//! * [`noise`]: iid and dependent Gaussian noise generators.
//! * [`diagnostics`]: dependence diagnostics and concentration of maxima.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod boundaries;
pub mod diagnostics;
mod error;
mod fft;
pub mod linalg;
pub mod noise;
pub mod procedures;
pub mod special;
pub mod tail_models;

pub use error::{Error, Result};
pub use noise::{NoiseGenerator, NoiseModel};
pub use procedures::{Procedure, RecoveryMetrics, Rule, SupportEstimate};
pub use tail_models::{lambert_w, Branch, TailFamily};
