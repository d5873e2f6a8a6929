//! Random feature models with learnable activation functions.
//!
//! The activation of a random feature model is parametrized as a weighted sum of
//! Gaussian radial basis functions on a uniform grid, `σ̃(z) = Σ_i a_i B_i(z)`,
//! and trained jointly with the output weights:
//!
//! ```text
//! f̂(x; a, v) = (1/M) Σ_m Σ_i a_i B_i(w_m·x) v_m,   w_m ~ N(0, I_d) frozen
//! ```
//!
//! This crate is `no_std` (it needs `alloc`) and carries all of the numerics:
//!
//! - [`kernel`]: closed form, Monte-Carlo estimate and Taylor machinery of the
//!   kernel induced by a single RBF activation.
//! - [`basis`]: the RBF grid, activation evaluation and quadrature weights.
//! - [`model`]: feature banks, the finite-width model and fixed-activation baselines.
//! - [`optim`]: regularized objective, analytic gradients, Adam and the training loop.
//! - [`data`]: synthetic targets, calibration and dataset generation.
//! - [`bounds`] and [`rate`]: theory-bound diagnostics and the approximation-rate study.
//!
//! File formats, configuration and the command line live in the `rflaf` crate.
#![no_std]

extern crate alloc;

pub mod basis;
pub mod bounds;
pub mod data;
mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod rate;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
