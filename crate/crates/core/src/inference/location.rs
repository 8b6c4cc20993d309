use nalgebra::{DMatrix, DVector};

use super::sigma::{scatter, SigmaEstimate};
use crate::chart::{unwrap_raw, VariantTag, WrappingVariant};
use crate::dist::{CovarianceSpec, WrappedNormalParams};
use crate::error::{invalid, Result};
use crate::manifold::{Kind, ManifoldId, Point};

const MAX_SWEEPS: usize = 200;
const MIN_STEP: f64 = 1e-8;
const RIDGE: f64 = 1e-10;

/// How the covariance is handled while the location moves.
#[derive(Debug, Clone)]
pub enum SigmaPolicy {
    /// Re-estimate `Σ̂(p)` at every candidate (profile likelihood).
    Profile,
    /// Hold `Σ` fixed.
    Fixed(CovarianceSpec),
}

#[derive(Debug, Clone)]
pub struct LocationFit {
    pub point: Point,
    /// Weighted negative log-likelihood at `point`.
    pub objective: f64,
    pub sweeps: usize,
    pub sigma: SigmaEstimate,
}

/// Location minimising the profile negative log-likelihood.
pub fn estimate_location(samples: &[Point], tag: VariantTag, policy: &SigmaPolicy) -> Result<Point> {
    estimate_location_weighted(samples, None, tag, policy, None).map(|f| f.point)
}

/// Weighted location search by geodesic coordinate descent.
///
/// Starts from `start`, or from the weighted extrinsic mean projected onto
/// the manifold. Each sweep tries `exp_p(±h e_j)` along an orthonormal
/// tangent frame and keeps a move only if it lowers the objective, so the
/// objective never increases; `h` halves after a sweep without moves.
pub fn estimate_location_weighted(
    samples: &[Point],
    weights: Option<&[f64]>,
    tag: VariantTag,
    policy: &SigmaPolicy,
    start: Option<&Point>,
) -> Result<LocationFit> {
    if samples.is_empty() {
        return Err(invalid("need at least one sample"));
    }
    let m = samples[0].manifold();
    if samples.iter().any(|y| y.manifold() != m) {
        return Err(invalid("samples live on different manifolds"));
    }
    if let SigmaPolicy::Fixed(s) = policy {
        if s.dim() != m.dim {
            return Err(invalid("fixed covariance has the wrong dimension"));
        }
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != samples.len() || w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(invalid("weights must be finite, non-negative and one per sample"));
            }
            w.to_vec()
        }
        None => vec![1.0; samples.len()],
    };
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("weights sum to zero"));
    }
    let objective = Objective { samples, weights: &w, total, tag, policy };

    let support: Vec<usize> = (0..samples.len()).filter(|&i| w[i] > 0.0).collect();
    if support.len() == 1 && matches!(policy, SigmaPolicy::Profile) {
        // the likelihood is unbounded as Σ shrinks onto a single point
        let p = samples[support[0]].clone();
        let (value, sigma) = objective.eval(&p);
        return Ok(LocationFit { point: p, objective: value, sweeps: 0, sigma });
    }

    let mut p = match start {
        Some(s) => s.clone(),
        None => extrinsic_mean(samples, &w).unwrap_or_else(|| samples[support[0]].clone()),
    };
    let (mut best, mut sigma) = objective.eval(&p);
    if !best.is_finite() {
        // fall back to the best-scoring sample
        for &i in &support {
            let (v, s) = objective.eval(&samples[i]);
            if v < best {
                best = v;
                sigma = s;
                p = samples[i].clone();
            }
        }
    }
    let k = m.dim;
    let mut step = (sigma.matrix.trace() / k as f64).sqrt().clamp(1e-6, 1.0) * 0.5 * m_scale(m);
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && step >= MIN_STEP {
        sweeps += 1;
        let mut moved = false;
        for j in 0..k {
            let frame = tangent_frame(m, p.coords());
            for sign in [1.0, -1.0] {
                let v = &frame[j] * (sign * step);
                let q = m.settle(m.exp_raw(p.coords(), &v));
                let (value, s) = objective.eval(&q);
                if value < best {
                    best = value;
                    sigma = s;
                    p = q;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(LocationFit { point: p, objective: best, sweeps, sigma })
}

fn m_scale(m: ManifoldId) -> f64 {
    if m.kind == Kind::Euclidean {
        1.0
    } else {
        m.scale
    }
}

struct Objective<'a> {
    samples: &'a [Point],
    weights: &'a [f64],
    total: f64,
    tag: VariantTag,
    policy: &'a SigmaPolicy,
}

impl Objective<'_> {
    // weighted negative log-likelihood and the covariance used for it
    fn eval(&self, p: &Point) -> (f64, SigmaEstimate) {
        let k = p.manifold().dim;
        let fail = || (f64::INFINITY, SigmaEstimate::from_matrix(DMatrix::zeros(k, k), self.samples.len()));
        let Ok(variant) = WrappingVariant::new(self.tag, p.clone()) else { return fail() };
        let mut us = Vec::with_capacity(self.samples.len());
        for (y, &w) in self.samples.iter().zip(self.weights) {
            if w == 0.0 {
                us.push(DVector::zeros(k));
                continue;
            }
            match unwrap_raw(&variant, y.coords()) {
                Ok(u) => us.push(u),
                Err(_) => return fail(),
            }
        }
        let estimate = SigmaEstimate::from_matrix(scatter(&us, Some(self.weights), k) / self.total, self.samples.len());
        let cov = match self.policy {
            SigmaPolicy::Fixed(s) => s.clone(),
            SigmaPolicy::Profile => {
                // a tiny ridge keeps the objective finite and continuous
                // when Σ̂ is (nearly) singular
                let ridge = (RIDGE * estimate.matrix.trace() / k as f64).max(1e-200);
                let s = &estimate.matrix + DMatrix::identity(k, k) * ridge;
                match CovarianceSpec::new(s) {
                    Ok(c) => c,
                    Err(_) => return fail(),
                }
            }
        };
        let Ok(params) = WrappedNormalParams::with_truncation(variant, cov, None) else { return fail() };
        let mut nll = 0.0;
        for (u, &w) in us.iter().zip(self.weights) {
            if w > 0.0 {
                nll -= w * params.log_pdf_chart(u);
            }
        }
        if nll.is_nan() {
            return fail();
        }
        (nll, estimate)
    }
}

/// Orthonormal basis of the tangent space at `p`, from projected ambient axes.
pub(crate) fn tangent_frame(m: ManifoldId, p: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = m.ambient_dim();
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(m.dim);
    for i in 0..n {
        if frame.len() == m.dim {
            break;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let mut v = m.tangent_projection(p, &e);
        for b in &frame {
            let c = m.form(&v, b);
            v -= b * c;
        }
        let norm = m.form(&v, &v).max(0.0).sqrt();
        if norm > 1e-6 {
            frame.push(v / norm);
        }
    }
    frame
}

/// Weighted ambient mean pushed back onto the manifold.
pub(crate) fn extrinsic_mean(samples: &[Point], weights: &[f64]) -> Option<Point> {
    let m = samples[0].manifold();
    let total: f64 = weights.iter().sum();
    let mut mean = DVector::zeros(m.ambient_dim());
    for (y, &w) in samples.iter().zip(weights) {
        mean += y.coords() * (w / total);
    }
    let coords = match m.kind {
        Kind::Euclidean => mean,
        Kind::Hyperboloid => {
            // a convex combination of upper-sheet points is future timelike
            let q = -m.form(&mean, &mean);
            if !(q > 0.0) {
                return None;
            }
            mean * (m.scale / q.sqrt())
        }
        Kind::Sphere => {
            let norm = mean.norm();
            if norm < 1e-12 * m.scale {
                return None;
            }
            mean * (m.scale / norm)
        }
    };
    Point::new(m, coords.iter().copied().collect()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::wrap;
    use crate::dist::wn_sample;
    use crate::manifold::geodesic_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_cases() {
        let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
        let p = Point::new(h2, vec![0.3, -0.4, (1.0f64 + 0.25).sqrt()]).unwrap();
        let got = estimate_location(&[p.clone(), p.clone(), p.clone()], VariantTag::IsometryLambert, &SigmaPolicy::Profile)
            .unwrap();
        assert!(geodesic_distance(&got, &p).unwrap() < 1e-6);
        let one = estimate_location(&[p.clone()], VariantTag::ExpParallelTransport, &SigmaPolicy::Profile).unwrap();
        assert_eq!(one.coords(), p.coords());
        assert!(estimate_location(&[], VariantTag::IsometryLambert, &SigmaPolicy::Profile).is_err());
    }

    #[test]
    fn symmetric_pair_returns_centre() {
        let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
        let p = Point::new(h2, vec![0.5, 0.2, (1.0f64 + 0.29).sqrt()]).unwrap();
        let v = WrappingVariant::new(VariantTag::IsometryLambert, p.clone()).unwrap();
        let pair = [wrap(&v, &[0.4, 0.7]).unwrap(), wrap(&v, &[-0.4, -0.7]).unwrap()];
        let got = estimate_location(&pair, VariantTag::IsometryLambert, &SigmaPolicy::Profile).unwrap();
        let d = geodesic_distance(&got, &p).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn frame_is_orthonormal_and_tangent() {
        for m in [ManifoldId::hyperboloid(3, 2.0).unwrap(), ManifoldId::sphere(2, 1.5).unwrap()] {
            let p = m.base_coords();
            let frame = tangent_frame(m, &p);
            assert_eq!(frame.len(), m.dim);
            for a in &frame {
                assert!(m.form(a, &p).abs() < 1e-12);
                for b in &frame {
                    let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                    assert!((m.form(a, b) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn recovers_location_on_sphere() {
        let s2 = ManifoldId::sphere(2, 1.0).unwrap();
        let target = Point::new(s2, vec![0.6, 0.0, -0.8]).unwrap();
        let v = WrappingVariant::new(VariantTag::IsometryLambert, target.clone()).unwrap();
        let params = WrappedNormalParams::new(v, CovarianceSpec::isotropic(2, 0.1).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ys = wn_sample(&params, &mut rng, 10_000).unwrap();
        let got = estimate_location(&ys, VariantTag::IsometryLambert, &SigmaPolicy::Profile).unwrap();
        let d = geodesic_distance(&got, &target).unwrap();
        assert!(d < 0.02, "{d}");
    }
}
