//! Sequential weak measurements of two observables with Gaussian Kraus operators.

pub mod analytic;
pub mod commands;
pub mod config;
pub mod error;
pub mod kraus;
pub mod montecarlo;
pub mod observable;
pub mod random;
pub mod scenarios;

pub use error::{Error, Result};
