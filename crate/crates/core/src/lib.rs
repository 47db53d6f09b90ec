//! Semiparametric density estimation by local L2-fitting with a Gaussian
//! parametric start.
//!
//! The estimator family
//!
//! ```text
//! f̂_α(x) = g(x) · n⁻¹ Σ K_h(X_i − x) g(X_i)^{1−α} / ∫ K_h(t − x) g(t)^{2−α} dt
//! ```
//!
//! contains the multiplicative-bias-correction (`α = 0`), local-likelihood (`α = 1`) and
//! parametric-start (`α = 2`) estimators. This crate provides the estimators, the
//! asymptotic theory of the index `α`, data-driven selectors for `α` and
//! `h`, a catalogue of test densities and a Monte Carlo harness.
//!
//! ```
//! use l2dens::estimator::{fhat_alpha, EstimatorConfig};
//! use l2dens::start::GaussianStart;
//! use l2dens::zoo::mw_density;
//!
//! let data = mw_density(2).unwrap().sample(500, 7);
//! let start = GaussianStart::fit_mle(&data).unwrap();
//! let cfg = EstimatorConfig::new(2.0, 0.3, start).unwrap();
//! let value = fhat_alpha(&data, 0.0, &cfg).unwrap();
//! assert!(value > 0.0);
//! ```

pub mod error;
pub mod estimator;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod selection;
pub mod sim;
pub mod start;
pub mod theory;
pub mod zoo;

pub use error::{Error, Result};
