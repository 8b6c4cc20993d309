//! Latent space network model on a curved manifold.
//!
//! Each node `i` has a latent position `z_i`; an edge between `i` and `j`
//! appears with probability `logistic(α - d(z_i, z_j))`. Positions carry a
//! wrapped-normal prior at the base point and `α ~ N(0, 10²)`. The posterior
//! is explored by a random-walk Metropolis-Hastings sampler whose position
//! proposals are wrapped Gaussian steps at the current point.

mod diagnostics;
mod graph;
mod mcmc;
mod mds;
mod model;

pub use diagnostics::{geweke_z, summarize, PosteriorSummary};
pub use graph::Graph;
pub use mcmc::{mh_run, mh_run_from, InitMode, MhConfig, Trace, TraceRecord};
pub use mds::mds_init;
pub use model::{network_log_likelihood, network_log_posterior, proposal_tag, NetworkState, Priors};

/// Marriage ties among 15 Florentine families (Padgett), as an edge list.
/// Node names are listed in the file's comment header.
pub const FLORENTINE_EDGES: &str = include_str!("../../data/florentine.csv");
