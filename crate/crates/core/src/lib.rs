//! Kernel-free quadratic-surface twin support vector machines.
//!
//! [`solver::cl1`] trains the capped-L1 model by iterative reweighting;
//! [`solver::lsq`] is the least-squares baseline. Both produce a
//! [`model::TrainedModel`] that classifies by the nearer of two quadratic
//! surfaces. [`data`] holds datasets and generators, [`eval`] the
//! cross-validation and statistics harness.

pub mod data;
pub mod error;
pub mod eval;
mod linalg;
pub mod model;
pub mod quadvec;
pub mod rng;
pub mod solver;

pub use data::{Dataset, NormalizationParams};
pub use error::{Error, Result};
pub use model::{Label, QuadraticSurface, TrainedModel};
pub use quadvec::{LiftedSample, LiftingMode};
pub use solver::{FitReport, LsqConfig, SolverConfig};
