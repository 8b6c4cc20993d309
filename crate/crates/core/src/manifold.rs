//! Exact geometry of the two constant-curvature model spaces.
//!
//! Both spaces live in `R^{k+1}` with the distinguished coordinate last:
//!
//! * hyperboloid `H^k_R = { x : <x,x>_M = -R^2, x_{k+1} > 0 }`, curvature `-1/R^2`,
//!   base point `(0, .., 0, R)`;
//! * sphere `S^k_K = { x : |x| = K }`, curvature `+1/K^2`, base point `(0, .., 0, -K)`.
//!
//! A flat `Euclidean` kind is carried along so that limits and plumbing have a
//! zero-curvature counterpart; its base point is the origin and its isometries
//! are rigid motions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Constraint residual above which a point is rejected outright.
pub const POINT_REJECT_TOL: f64 = 1e-8;
/// Constraint residual above which a derived point is re-projected.
pub const REPROJECT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hyperboloid,
    Sphere,
    Euclidean,
}

/// Which model space a point lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldId {
    pub kind: Kind,
    pub dim: usize,
    /// Radius `R` (hyperboloid) or `K` (sphere). Ignored for `Euclidean`.
    pub scale: f64,
}

impl ManifoldId {
    pub fn new(kind: Kind, dim: usize, scale: f64) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("manifold dimension must be at least 1"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { kind, dim, scale })
    }

    pub fn hyperboloid(dim: usize, radius: f64) -> Result<Self> {
        Self::new(Kind::Hyperboloid, dim, radius)
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        Self::new(Kind::Sphere, dim, radius)
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(Kind::Euclidean, dim, 1.0)
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            Kind::Euclidean => self.dim,
            _ => self.dim + 1,
        }
    }

    /// Sectional curvature, derived from the radius.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            Kind::Hyperboloid => -1.0 / (self.scale * self.scale),
            Kind::Sphere => 1.0 / (self.scale * self.scale),
            Kind::Euclidean => 0.0,
        }
    }

    pub(crate) fn base_coords(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.ambient_dim());
        match self.kind {
            Kind::Hyperboloid => c[self.dim] = self.scale,
            Kind::Sphere => c[self.dim] = -self.scale,
            Kind::Euclidean => {}
        }
        c
    }

    /// The base point `p0` at which charts and tangent embeddings are anchored.
    pub fn base_point(&self) -> Point {
        Point { manifold: *self, coords: self.base_coords() }
    }

    /// The ambient bilinear form: Minkowski on the hyperboloid, dot product otherwise.
    pub(crate) fn form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self.kind {
            Kind::Hyperboloid => lorentz(x, y),
            _ => x.dot(y),
        }
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        let s2 = self.scale * self.scale;
        match self.kind {
            Kind::Hyperboloid => (lorentz(x, x) + s2).abs() / (s2 + x.norm_squared()),
            Kind::Sphere => (x.norm_squared() - s2).abs() / s2,
            Kind::Euclidean => 0.0,
        }
    }

    fn project(&self, x: &mut DVector<f64>) {
        match self.kind {
            Kind::Hyperboloid => {
                let k = self.dim;
                let spatial: f64 = x.rows(0, k).norm_squared();
                x[k] = (self.scale * self.scale + spatial).sqrt();
            }
            Kind::Sphere => {
                let n = x.norm();
                *x *= self.scale / n;
            }
            Kind::Euclidean => {}
        }
    }

    /// Wraps ambient coordinates produced by an exact operation, re-projecting
    /// onto the manifold when round-off has accumulated.
    pub(crate) fn settle(&self, mut x: DVector<f64>) -> Point {
        if self.residual(&x) > REPROJECT_TOL {
            self.project(&mut x);
        }
        Point { manifold: *self, coords: x }
    }

    /// Removes the normal component of `v` at `p`.
    pub(crate) fn tangent_projection(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let s2 = self.scale * self.scale;
        match self.kind {
            Kind::Hyperboloid => v + p * (lorentz(p, v) / s2),
            Kind::Sphere => v - p * (p.dot(v) / s2),
            Kind::Euclidean => v.clone(),
        }
    }

    /// Norm of a tangent vector under the induced Riemannian metric.
    pub(crate) fn tangent_norm(&self, v: &DVector<f64>) -> f64 {
        self.form(v, v).max(0.0).sqrt()
    }

    pub(crate) fn exp_raw(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.tangent_norm(v);
        if n == 0.0 {
            return p.clone();
        }
        let t = n / self.scale;
        match self.kind {
            Kind::Hyperboloid => p * t.cosh() + v * sinhc(t),
            Kind::Sphere => p * t.cos() + v * sinc(t),
            Kind::Euclidean => p + v,
        }
    }

    pub(crate) fn log_raw(&self, p: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.scale;
        let s2 = s * s;
        match self.kind {
            Kind::Hyperboloid => {
                let w = q + p * (lorentz(p, q) / s2);
                let n = self.tangent_norm(&w);
                if n / s < 1e-300 {
                    return Ok(w);
                }
                let t = (n / s).asinh();
                Ok(w * (t * s / n))
            }
            Kind::Sphere => {
                let beta = p.dot(q) / s2;
                let w = q - p * beta;
                let n = w.norm();
                if n / s < 1e-12 && beta < 0.0 {
                    return Err(Error::UndefinedLog);
                }
                if n == 0.0 {
                    return Ok(w);
                }
                let t = (n / s).atan2(beta);
                Ok(w * (t * s / n))
            }
            Kind::Euclidean => Ok(q - p),
        }
    }

    pub(crate) fn distance_raw(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let s = self.scale;
        match self.kind {
            Kind::Hyperboloid => {
                let c = -lorentz(a, b) / (s * s);
                if c < 1.5 {
                    let d = a - b;
                    let chord = lorentz(&d, &d).max(0.0).sqrt();
                    2.0 * s * (chord / (2.0 * s)).asinh()
                } else {
                    s * c.acosh()
                }
            }
            Kind::Sphere => 2.0 * s * (a - b).norm().atan2((a + b).norm()),
            Kind::Euclidean => (a - b).norm(),
        }
    }

    pub(crate) fn transport_raw(
        &self,
        from: &DVector<f64>,
        to: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let s2 = self.scale * self.scale;
        let w = match self.kind {
            Kind::Hyperboloid => {
                let denom = s2 - lorentz(from, to);
                v + (from + to) * (lorentz(to, v) / denom)
            }
            Kind::Sphere => {
                let denom = s2 + from.dot(to);
                if denom <= 1e-12 * s2 {
                    return Err(Error::UndefinedTransport);
                }
                v - (from + to) * (to.dot(v) / denom)
            }
            Kind::Euclidean => return Ok(v.clone()),
        };
        Ok(self.tangent_projection(to, &w))
    }
}

/// `sum_{i<=k} x_i y_i - x_{k+1} y_{k+1}`, without length checks.
pub(crate) fn lorentz(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n - 1 {
        acc += x[i] * y[i];
    }
    acc - x[n - 1] * y[n - 1]
}

/// Minkowski inner product of two ambient vectors.
pub fn minkowski_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(invalid("Minkowski vectors need at least two components"));
    }
    let n = x.len();
    let spatial: f64 = x[..n - 1].iter().zip(&y[..n - 1]).map(|(a, b)| a * b).sum();
    Ok(spatial - x[n - 1] * y[n - 1])
}

/// `sinh(x)/x` with its series near zero.
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// `sin(x)/x` with its series near zero.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// A validated point in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    manifold: ManifoldId,
    coords: DVector<f64>,
}

impl Point {
    /// Validates `coords` against the manifold constraint. Small violations
    /// (relative residual up to 1e-8) are re-projected away.
    pub fn new(manifold: ManifoldId, coords: Vec<f64>) -> Result<Self> {
        make_point(manifold, coords)
    }

    pub fn manifold(&self) -> ManifoldId {
        self.manifold
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.iter().copied().collect()
    }

    /// Relative violation of the defining constraint.
    pub fn residual(&self) -> f64 {
        self.manifold.residual(&self.coords)
    }
}

pub fn make_point(manifold: ManifoldId, coords: Vec<f64>) -> Result<Point> {
    if coords.len() != manifold.ambient_dim() {
        return Err(invalid(format!(
            "expected {} ambient coordinates, got {}",
            manifold.ambient_dim(),
            coords.len()
        )));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(invalid("non-finite coordinate"));
    }
    let mut x = DVector::from_vec(coords);
    if manifold.kind == Kind::Hyperboloid && x[manifold.dim] <= 0.0 {
        return Err(Error::WrongSheet);
    }
    let residual = manifold.residual(&x);
    if residual > POINT_REJECT_TOL {
        return Err(Error::InvalidPoint { residual });
    }
    if residual > REPROJECT_TOL {
        manifold.project(&mut x);
    }
    Ok(Point { manifold, coords: x })
}

/// An ambient vector tangent to the manifold at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Point,
    coords: DVector<f64>,
}

impl TangentVector {
    /// Checks tangency (relative tolerance 1e-8) and removes any residual
    /// normal component.
    pub fn new(base: Point, coords: Vec<f64>) -> Result<Self> {
        let m = base.manifold;
        if coords.len() != m.ambient_dim() {
            return Err(invalid("tangent vector length does not match the ambient dimension"));
        }
        let v = DVector::from_vec(coords);
        let pairing = m.form(&base.coords, &v).abs();
        let scale = m.scale * (1.0 + v.norm());
        if pairing > POINT_REJECT_TOL * scale {
            return Err(invalid(format!("vector is not tangent (pairing {pairing:.3e})")));
        }
        let coords = m.tangent_projection(&base.coords, &v);
        Ok(Self { base, coords })
    }

    pub(crate) fn from_raw(base: Point, coords: DVector<f64>) -> Self {
        Self { base, coords }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.iter().copied().collect()
    }

    /// Riemannian length of the vector.
    pub fn norm(&self) -> f64 {
        self.base.manifold.tangent_norm(&self.coords)
    }

    /// Metric inner product with another vector at the same base point.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        self.base.manifold.form(&self.coords, &other.coords)
    }
}

fn same_manifold(a: &Point, b: &Point) -> Result<()> {
    if a.manifold != b.manifold {
        return Err(invalid("points live on different manifolds"));
    }
    Ok(())
}

fn check_base(p: &Point, v: &TangentVector) -> Result<()> {
    same_manifold(p, &v.base)?;
    let gap = (&p.coords - &v.base.coords).amax();
    if gap > 1e-9 * p.manifold.scale.max(p.coords.amax()) {
        return Err(invalid("tangent vector is attached to a different base point"));
    }
    Ok(())
}

pub fn geodesic_distance(a: &Point, b: &Point) -> Result<f64> {
    same_manifold(a, b)?;
    Ok(a.manifold.distance_raw(&a.coords, &b.coords))
}

pub fn exp_map(p: &Point, v: &TangentVector) -> Result<Point> {
    check_base(p, v)?;
    Ok(p.manifold.settle(p.manifold.exp_raw(&p.coords, &v.coords)))
}

pub fn log_map(p: &Point, q: &Point) -> Result<TangentVector> {
    same_manifold(p, q)?;
    let v = p.manifold.log_raw(&p.coords, &q.coords)?;
    let v = p.manifold.tangent_projection(&p.coords, &v);
    Ok(TangentVector::from_raw(p.clone(), v))
}

/// Parallel transport of `v` from `from` to `to` along the minimizing geodesic.
pub fn parallel_transport(from: &Point, to: &Point, v: &TangentVector) -> Result<TangentVector> {
    check_base(from, v)?;
    same_manifold(from, to)?;
    let w = from.manifold.transport_raw(&from.coords, &to.coords, &v.coords)?;
    Ok(TangentVector::from_raw(to.clone(), w))
}

/// Embeds `u` in `T_{p0}` as `(u, 0)`.
pub fn embed_tangent(u: &[f64], manifold: ManifoldId) -> Result<TangentVector> {
    if u.len() != manifold.dim {
        return Err(invalid(format!("expected {} tangent coordinates, got {}", manifold.dim, u.len())));
    }
    let mut v = DVector::zeros(manifold.ambient_dim());
    v.rows_mut(0, manifold.dim).copy_from_slice(u);
    Ok(TangentVector::from_raw(manifold.base_point(), v))
}

/// An isometry `x -> A x + b` of a model space. `b` is zero except on the flat kind.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryMatrix {
    manifold: ManifoldId,
    entries: DMatrix<f64>,
    offset: DVector<f64>,
}

impl IsometryMatrix {
    pub fn identity(manifold: ManifoldId) -> Self {
        let n = manifold.ambient_dim();
        Self { manifold, entries: DMatrix::identity(n, n), offset: DVector::zeros(n) }
    }

    /// Validates a linear isometry: it must preserve the ambient form within
    /// 1e-9, keep the upper sheet (hyperboloid) and have `|det| = 1`.
    pub fn from_entries(manifold: ManifoldId, entries: DMatrix<f64>) -> Result<Self> {
        let n = manifold.ambient_dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(invalid("isometry matrix has the wrong shape"));
        }
        let gram = form_matrix(manifold);
        let defect = (entries.transpose() * &gram * &entries - &gram).amax();
        if defect > 1e-9 {
            return Err(invalid(format!("matrix does not preserve the ambient form (defect {defect:.3e})")));
        }
        if (entries.determinant().abs() - 1.0).abs() > 1e-9 {
            return Err(invalid("isometry must have unit determinant"));
        }
        if manifold.kind == Kind::Hyperboloid && entries[(n - 1, n - 1)] <= 0.0 {
            return Err(invalid("matrix swaps the sheets of the hyperboloid"));
        }
        Ok(Self { manifold, entries, offset: DVector::zeros(n) })
    }

    /// Rotation `Q` of the tangent space at `p0`, extended to fix `p0`.
    pub fn rotation_at_base(manifold: ManifoldId, rotation: &DMatrix<f64>) -> Result<Self> {
        let k = manifold.dim;
        if rotation.nrows() != k || rotation.ncols() != k {
            return Err(invalid("rotation must be k x k"));
        }
        let n = manifold.ambient_dim();
        let mut a = DMatrix::identity(n, n);
        a.view_mut((0, 0), (k, k)).copy_from(rotation);
        if manifold.kind == Kind::Euclidean {
            return Ok(Self { manifold, entries: a, offset: DVector::zeros(n) });
        }
        Self::from_entries(manifold, a)
    }

    pub fn manifold(&self) -> ManifoldId {
        self.manifold
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn inverse(&self) -> Self {
        let at = self.entries.transpose();
        let entries = match self.manifold.kind {
            Kind::Hyperboloid => {
                let j = form_matrix(self.manifold);
                &j * at * &j
            }
            _ => at,
        };
        let offset = -(&entries * &self.offset);
        Self { manifold: self.manifold, entries, offset }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &IsometryMatrix) -> Self {
        Self {
            manifold: self.manifold,
            entries: &self.entries * &other.entries,
            offset: &self.entries * &other.offset + &self.offset,
        }
    }

    pub(crate) fn apply_raw(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.entries * x + &self.offset
    }

    /// Pushes a tangent vector forward by the differential of the isometry.
    pub fn apply_tangent(&self, v: &TangentVector) -> Result<TangentVector> {
        let base = apply_isometry(self, &v.base)?;
        let w = &self.entries * &v.coords;
        let w = self.manifold.tangent_projection(&base.coords, &w);
        Ok(TangentVector::from_raw(base, w))
    }
}

/// `diag(1, .., 1, -1)` on the hyperboloid, the identity otherwise.
pub(crate) fn form_matrix(m: ManifoldId) -> DMatrix<f64> {
    let n = m.ambient_dim();
    let mut j = DMatrix::identity(n, n);
    if m.kind == Kind::Hyperboloid {
        j[(n - 1, n - 1)] = -1.0;
    }
    j
}

/// The isometry mapping `p0` to `p` whose differential at `p0` is parallel
/// transport along the geodesic: a Lorentz boost on the hyperboloid, a
/// rotation in `span{p0, p}` on the sphere, a translation on the flat kind.
pub fn isometry_to(p: &Point) -> Result<IsometryMatrix> {
    let m = p.manifold;
    let n = m.ambient_dim();
    if m.kind == Kind::Euclidean {
        return Ok(IsometryMatrix { manifold: m, entries: DMatrix::identity(n, n), offset: p.coords.clone() });
    }
    let k = m.dim;
    let s = m.scale;
    let p0 = m.base_coords();
    let x = &p.coords;
    let shift = &p0 + x;
    let mut a = DMatrix::zeros(n, n);
    match m.kind {
        Kind::Hyperboloid => {
            let denom = s * s + s * x[k];
            for j in 0..k {
                let mut col = shift.clone() * (x[j] / denom);
                col[j] += 1.0;
                a.set_column(j, &col);
            }
            a.set_column(k, &(x / s));
        }
        Kind::Sphere => {
            let denom = s * s - s * x[k];
            if denom <= 1e-12 * s * s {
                return Err(Error::UndefinedTransport);
            }
            for j in 0..k {
                let mut col = shift.clone() * (-x[j] / denom);
                col[j] += 1.0;
                a.set_column(j, &col);
            }
            a.set_column(k, &(x / -s));
        }
        Kind::Euclidean => unreachable!(),
    }
    Ok(IsometryMatrix { manifold: m, entries: a, offset: DVector::zeros(n) })
}

pub fn apply_isometry(a: &IsometryMatrix, x: &Point) -> Result<Point> {
    if a.manifold != x.manifold {
        return Err(invalid("isometry and point live on different manifolds"));
    }
    Ok(x.manifold.settle(a.apply_raw(&x.coords)))
}
