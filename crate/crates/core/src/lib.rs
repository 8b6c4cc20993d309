//! Wrapped normal distributions on the hyperboloid and the round sphere.
//!
//! The crate is organised bottom-up:
//!
//! * [`manifold`]: exact geometry of the model spaces;
//! * [`chart`]: wrapping maps from `R^k` onto a manifold (exponential and Lambert);
//! * [`dist`]: wrapped normals, truncation, mixtures, the von Mises reference density;
//! * [`inference`]: covariance MLE, inverse-Wishart updates, location search, EM;
//! * [`lsnm`]: a latent space network model fitted by Metropolis-Hastings;
//! * [`io`]: CSV formats for samples and traces;
//! * [`testkit`]: independent numerical oracles and the verification suite.

pub mod chart;
pub mod dist;
pub mod error;
pub mod inference;
pub mod io;
pub mod lsnm;
pub mod manifold;
pub mod testkit;

pub use error::{Error, Result};
