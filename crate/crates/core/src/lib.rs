//! Query-based molecule optimization (QMO) over a continuous latent space.
//!
//! The engine only ever sees black-box evaluations: a decoder that maps a
//! latent point to a discrete sequence, property predictors, and similarity
//! metrics. Gradients are estimated from random directional queries and fed
//! into plain pseudo gradient descent or a zeroth-order Adam variant.
//!
//! Modules:
//! - [`oracle`]: query-counted access to decoder/property/similarity oracles,
//!   in-process or over a newline-delimited JSON subprocess protocol.
//! - [`loss`]: the two hinge-constrained objectives and validity checks.
//! - [`zo`]: unit-sphere direction sampling and the random-direction
//!   gradient estimator.
//! - [`solver`]: the outer loop, restarts, sweeps and best-solution selection.
//! - [`metrics`]: Tanimoto similarity and affine-gap global alignment.
//! - [`testbed`]: synthetic problems with brute-force references.
//! - [`landscape`]: 2D latent grids and trajectory projection.
//! - [`config`] and [`report`]: run configuration and artifact writers.

pub mod config;
pub mod driver;
pub mod error;
pub mod landscape;
pub mod loss;
pub mod metrics;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod solver;
pub mod testbed;
pub mod types;
pub mod zo;

pub use error::{QmoError, Result};
pub use loss::{Assessment, BatchLoss, Direction, LossMode, ObjectiveConfig, QmoLoss};
pub use oracle::{OracleBackend, OracleSuite, QueryCounts};
pub use solver::{Candidate, OptimizerKind, SolutionSet, SolverConfig};
pub use types::{LatentVector, ReferenceSet, Sequence};
