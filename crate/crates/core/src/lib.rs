//! Inference of a time-dependent (pressure-dependent) thermal conductivity
//! in a radial heat-diffusion model from noisy temperature observations.
//!
//! The conductivity `k(t) = exp(u(t))` is represented on a piecewise-linear
//! basis and constrained to the uniqueness set `Q` ([`conductivity`]); the
//! direct problem is solved with a second-order Crank–Nicolson scheme
//! ([`pde`]); the prior on the free knots is a Gaussian Markov random field
//! conditioned on the known initial value with a Gamma-distributed scale
//! ([`gmrf`]); and the posterior is sampled with a Single Variable Exchange
//! Metropolis–Hastings algorithm driven by a t-walk proposal ([`sampler`],
//! [`twalk`]). The [`experiment`] module produces synthetic scenarios and
//! the [`cli`] module the batch command-line front end.

// Validation guards are written as `!(x > 0.0)` on purpose so that NaN is
// rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conductivity;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gmrf;
pub mod pde;
pub mod sampler;
pub mod seeds;
pub mod twalk;

pub use error::{Error, Result};
