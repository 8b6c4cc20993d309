//! Independent numerical oracles and the verification suite.
//!
//! Each oracle avoids the code path it checks: determinants come from
//! central differences and the ambient metric (never from
//! `log_det_jacobian`), normalisation from quadrature (never from the
//! sampler), geodesics and transport from ODE integration.

mod grid;
mod oracles;
pub mod suite;

pub use grid::{
    grid_integral, grid_normalization, histogram_tv, pushforward_tv_against, pushforward_tv_distance,
    sup_norm_gap, Axis, GridSpec,
};
pub use oracles::{
    fd_jacobian_det, integrate_geodesic, literal_isometry_matrix, transport_by_integration, FD_STEP,
};
