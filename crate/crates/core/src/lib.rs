//! Random walks, effective resistance and scaling estimators on random
//! graphs, with long-range percolation on the integer line as the main model.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: immutable weighted multigraphs, balls and volumes.
//! - [`generators`]: seeded random-graph samplers and fixtures.
//! - [`resistance`]: effective resistance, killed Green kernels, long-bond projection.
//! - [`walk`]: exact heat kernels and Monte Carlo trajectories.
//! - [`scaling`]: growth functions, the `J(λ)` test, exponent fits, ensemble estimators.
//! - [`oracle`]: dense reference implementations for small graphs.
//! - [`experiment`]: configuration, presets and the run/report pipeline.

pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod resistance;
pub mod scaling;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Bond, Graph, Metric, VertexId, Window};
