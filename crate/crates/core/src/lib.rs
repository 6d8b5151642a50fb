//! Mixture wealth processes for sub-Gaussian data: exact regret against the
//! best constant bet in hindsight, pathwise and conditional regret bounds
//! for the Gaussian and Robbins priors, and a Monte Carlo harness that
//! checks them.

pub mod bounds;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod path;
pub mod prior;
pub mod quad;
pub mod selftest;
pub mod wealth;

pub use error::{Error, Result};
pub use path::{hindsight_optimum, HindsightOptimum, PathState, PriorSpec, WealthRecord};
pub use prior::RobbinsPrior;
