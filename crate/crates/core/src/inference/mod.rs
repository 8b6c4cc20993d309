//! Parameter estimation for wrapped normals.
//!
//! Every estimator works in unwrapped coordinates: once a location is fixed,
//! the samples become Euclidean vectors `u_i` and the covariance step is the
//! classical one.

mod em;
mod location;
mod sigma;

pub use em::{em_fit, em_fit_with, EmConfig, EmFit};
pub use location::{estimate_location, estimate_location_weighted, LocationFit, SigmaPolicy};
pub use sigma::{iw_log_density, iw_posterior, mle_sigma, unwrap_all, IWParams, SigmaEstimate};
