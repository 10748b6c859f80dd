//! Likelihood-free Bayesian model choice between two competing models from
//! summary statistics, with diagnostics for whether a statistic can tell the
//! models apart.
//!
//! The crate is organised bottom-up: [`numerics`] (random streams and small
//! numerical kernels), [`stats`] (summary statistics), [`models`] (priors,
//! simulators and asymptotic mean maps), [`abc`] (reference tables and
//! rejection sampling) and [`validation`] (the posterior-predictive common
//! mean test).

pub mod abc;
pub mod error;
pub mod models;
pub mod numerics;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
