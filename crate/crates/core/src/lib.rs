//! Graphon-induced random graphs, graph convolutional network embeddings and
//! the hypothesis tests built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! - [`graphon`]: step graphons, stochastic block models, the equal-degree
//!   family, degree profiles and the degree-profile separation.
//! - [`sampling`]: latent points, (coupled) graph samples and the random
//!   walk matrix.
//! - [`gcn`]: activations, the GCN recursion, embedding vectors, norm budgets
//!   and the uniform perturbation channel.
//! - [`analysis`]: distances, cut norm / cut distance, stationary
//!   distributions and the closed-form error lower bounds.
//! - [`hypotest`]: the end-to-end testing pipeline and Monte Carlo
//!   experiments.
//! - [`io`]: edge lists, JSON documents and CSV rows.

pub mod analysis;
pub mod error;
pub mod gcn;
pub mod graphon;
pub mod hypotest;
pub mod io;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use gcn::{Activation, ActivationKind, EmbeddingVector, GcnSpec, NormBudget, SpecMatrix};
pub use graphon::{DegreeProfile, FamilyPoint, SbmParams, StepGraphon};
pub use sampling::{LatentPoints, RandomWalkMatrix, SampleGraph};
