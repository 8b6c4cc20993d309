use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::chart::{unwrap_raw, WrappingVariant};
use crate::dist::CovarianceSpec;
use crate::error::{invalid, Result};
use crate::manifold::Point;

/// Unwraps every sample at the variant's location.
pub fn unwrap_all(samples: &[Point], variant: &WrappingVariant) -> Result<Vec<DVector<f64>>> {
    let m = variant.manifold();
    samples
        .iter()
        .map(|y| {
            if y.manifold() != m {
                return Err(invalid("sample lives on a different manifold"));
            }
            unwrap_raw(variant, y.coords())
        })
        .collect()
}

pub(crate) fn scatter(us: &[DVector<f64>], weights: Option<&[f64]>, k: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(k, k);
    for (i, u) in us.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        if w != 0.0 {
            s.ger(w, u, u, 1.0);
        }
    }
    s
}

/// Covariance estimate `Σ̂ = (1/m) Σ u_i u_iᵀ`; may be singular.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaEstimate {
    pub matrix: DMatrix<f64>,
    pub samples: usize,
    /// Set when `Σ̂` is not positive definite (for instance `m ≤ k`).
    pub singular: bool,
}

impl SigmaEstimate {
    pub(crate) fn from_matrix(matrix: DMatrix<f64>, samples: usize) -> Self {
        let singular = is_singular(&matrix);
        Self { matrix, samples, singular }
    }

    pub fn covariance(&self) -> Result<CovarianceSpec> {
        if self.singular {
            return Err(invalid("estimated covariance is singular"));
        }
        CovarianceSpec::new(self.matrix.clone())
    }
}

pub(crate) fn is_singular(s: &DMatrix<f64>) -> bool {
    let scale = s.trace().abs().max(f64::MIN_POSITIVE);
    let min = s.clone().symmetric_eigenvalues().min();
    !(min > 1e-12 * scale) || s.clone().cholesky().is_none()
}

pub fn mle_sigma(samples: &[Point], variant: &WrappingVariant) -> Result<SigmaEstimate> {
    if samples.is_empty() {
        return Err(invalid("need at least one sample"));
    }
    let us = unwrap_all(samples, variant)?;
    let k = variant.manifold().dim;
    let s = scatter(&us, None, k) / samples.len() as f64;
    Ok(SigmaEstimate::from_matrix(s, samples.len()))
}

/// Inverse-Wishart parameters `IW(ν, Φ)` on `k×k` covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct IWParams {
    nu: f64,
    phi: DMatrix<f64>,
}

impl IWParams {
    pub fn new(nu: f64, phi: DMatrix<f64>) -> Result<Self> {
        let k = phi.nrows();
        if k == 0 || phi.ncols() != k {
            return Err(invalid("scale matrix must be square and non-empty"));
        }
        if !(nu > k as f64 - 1.0) || !nu.is_finite() {
            return Err(invalid(format!("degrees of freedom {nu} must exceed k - 1 = {}", k - 1)));
        }
        // validates symmetry and positive definiteness
        CovarianceSpec::new(phi.clone())?;
        Ok(Self { nu, phi })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }
}

/// Conjugate update `IW(ν + m, Φ + Σ u_i u_iᵀ)`.
pub fn iw_posterior(prior: &IWParams, samples: &[Point], variant: &WrappingVariant) -> Result<IWParams> {
    if prior.dim() != variant.manifold().dim {
        return Err(invalid("prior dimension does not match the manifold"));
    }
    let us = unwrap_all(samples, variant)?;
    let phi = &prior.phi + scatter(&us, None, prior.dim());
    Ok(IWParams { nu: prior.nu + samples.len() as f64, phi })
}

fn ln_multigamma(k: usize, a: f64) -> f64 {
    let kf = k as f64;
    kf * (kf - 1.0) / 4.0 * std::f64::consts::PI.ln() + (0..k).map(|j| ln_gamma(a - j as f64 / 2.0)).sum::<f64>()
}

/// Log-density of `IW(ν, Φ)` at `Σ` with respect to Lebesgue measure on the
/// free entries of a symmetric matrix.
pub fn iw_log_density(params: &IWParams, sigma: &CovarianceSpec) -> Result<f64> {
    let k = params.dim();
    if sigma.dim() != k {
        return Err(invalid("covariance dimension does not match the prior"));
    }
    let kf = k as f64;
    let nu = params.nu;
    let phi_chol = params.phi.clone().cholesky().ok_or_else(|| invalid("scale matrix is not positive definite"))?;
    let ln_det_phi = 2.0 * phi_chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let sigma_inv = sigma
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| invalid("covariance is not positive definite"))?
        .inverse();
    let trace = (&params.phi * sigma_inv).trace();
    Ok(0.5 * nu * ln_det_phi
        - 0.5 * nu * kf * std::f64::consts::LN_2
        - ln_multigamma(k, 0.5 * nu)
        - 0.5 * (nu + kf + 1.0) * sigma.log_det()
        - 0.5 * trace)
}
