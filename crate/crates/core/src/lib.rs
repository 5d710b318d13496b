//! Grover-type amplitude estimation under global depolarizing noise.
//!
//! [`amplitude_model`] holds the closed-form outcome distributions of the
//! G-based and Q-based methods, [`fisher`] the classical and quantum Fisher
//! information built on them, [`estimator`] the maximum-likelihood RMSE
//! experiment, and [`oracle`] a small density-matrix simulator used to
//! check all of the above. [`cli`] wires everything to the `qae-lab` binary.

pub mod amplitude_model;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod oracle;

pub use amplitude_model::{EstimationProblem, Method, NoiseModel, SystemSize};
pub use error::{Error, Result};
