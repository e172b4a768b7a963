//! Bayesian nonparametric survival analysis with histogram hazard priors.
//!
//! The pipeline is: load right-censored data ([`data`]), reduce it to
//! per-interval event counts and exposures, sample the posterior of a
//! piecewise-constant hazard ([`sampler`]) under one of the histogram priors
//! in [`priors`], and turn the draws into fixed-radius simultaneous credible
//! bands ([`bands`]). Classical estimators and confidence bands live in
//! [`frequentist`]; [`sim`] runs coverage studies on synthetic data.

pub mod bands;
pub mod data;
pub mod error;
pub mod frequentist;
pub mod haar;
pub mod hazard;
pub mod io;
pub mod numeric;
pub mod priors;
pub mod rng;
pub mod sampler;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
