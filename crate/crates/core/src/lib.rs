//! Latent-position random graphs, spectral GNNs and Structural GNNs on them,
//! their continuous limits, bound constants and training.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod gnn;
pub mod limit;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod train;

pub use error::{Error, Result};
