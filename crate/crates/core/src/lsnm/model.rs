use crate::chart::{VariantTag, WrappingVariant};
use crate::dist::{wn_log_pdf, CovarianceSpec, WrappedNormalParams};
use crate::error::{invalid, Result};
use crate::manifold::{Kind, ManifoldId, Point};

use super::graph::Graph;

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Log-likelihood contribution of one pair.
pub(crate) fn pair_term(edge: bool, alpha: f64, d: f64) -> f64 {
    let eta = alpha - d;
    if edge {
        eta - softplus(eta)
    } else {
        -softplus(eta)
    }
}

/// Wrapping used for priors and proposals: Lambert on 2-manifolds, the
/// exponential map otherwise.
pub fn proposal_tag(m: ManifoldId) -> VariantTag {
    if m.dim == 2 {
        VariantTag::IsometryLambert
    } else {
        VariantTag::ExpParallelTransport
    }
}

#[derive(Debug, Clone)]
pub struct Priors {
    pub alpha_mean: f64,
    pub alpha_sd: f64,
    pub position: WrappedNormalParams,
}

impl Priors {
    /// `α ~ N(0, 10²)` and `z_i ~ WN(p0, σ0² I)` with `σ0 = 0.3 K` on the
    /// sphere (well inside the truncation disc) and `σ0 = 1` elsewhere.
    pub fn default_for(m: ManifoldId) -> Result<Self> {
        let sigma0 = match m.kind {
            Kind::Sphere => 0.3 * m.scale,
            _ => 1.0,
        };
        Self::with_position_scale(m, sigma0)
    }

    pub fn with_position_scale(m: ManifoldId, sigma0: f64) -> Result<Self> {
        let v = WrappingVariant::at_base(proposal_tag(m), m)?;
        let position = WrappedNormalParams::new(v, CovarianceSpec::isotropic(m.dim, sigma0 * sigma0)?)?;
        Ok(Self { alpha_mean: 0.0, alpha_sd: 10.0, position })
    }

    pub(crate) fn alpha_log_density(&self, alpha: f64) -> f64 {
        let z = (alpha - self.alpha_mean) / self.alpha_sd;
        -0.5 * z * z - self.alpha_sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    pub(crate) fn position_log_density(&self, z: &Point) -> Result<f64> {
        wn_log_pdf(&self.position, z)
    }
}

#[derive(Debug, Clone)]
pub struct NetworkState {
    pub positions: Vec<Point>,
    pub alpha: f64,
    pub step_pos: f64,
    pub step_alpha: f64,
}

impl NetworkState {
    pub fn new(positions: Vec<Point>, alpha: f64, step_pos: f64, step_alpha: f64) -> Result<Self> {
        if !(step_pos > 0.0 && step_alpha > 0.0) {
            return Err(invalid("step sizes must be positive"));
        }
        if !alpha.is_finite() {
            return Err(invalid("alpha must be finite"));
        }
        if let Some(first) = positions.first() {
            if positions.iter().any(|p| p.manifold() != first.manifold()) {
                return Err(invalid("positions live on different manifolds"));
            }
        }
        Ok(Self { positions, alpha, step_pos, step_alpha })
    }

    pub fn manifold(&self) -> Option<ManifoldId> {
        self.positions.first().map(Point::manifold)
    }
}

/// `Σ_{i<j} [y_ij η_ij − log(1 + e^{η_ij})]` with `η_ij = α − d(z_i, z_j)`.
pub fn network_log_likelihood(state: &NetworkState, graph: &Graph) -> Result<f64> {
    if state.positions.len() != graph.n() {
        return Err(invalid(format!("{} positions for a graph on {} nodes", state.positions.len(), graph.n())));
    }
    let m = match state.manifold() {
        Some(m) => m,
        None => return Ok(0.0),
    };
    let mut total = 0.0;
    for i in 0..graph.n() {
        for j in i + 1..graph.n() {
            let d = m.distance_raw(state.positions[i].coords(), state.positions[j].coords());
            total += pair_term(graph.has_edge(i, j), state.alpha, d);
        }
    }
    Ok(total)
}

/// Likelihood plus the priors on `α` and the positions.
pub fn network_log_posterior(state: &NetworkState, graph: &Graph, priors: &Priors) -> Result<f64> {
    let mut lp = network_log_likelihood(state, graph)? + priors.alpha_log_density(state.alpha);
    if let Some(m) = state.manifold() {
        if m != priors.position.variant().manifold() {
            return Err(invalid("prior and positions live on different manifolds"));
        }
    }
    for z in &state.positions {
        lp += priors.position_log_density(z)?;
    }
    Ok(lp)
}
