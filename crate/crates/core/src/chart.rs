//! Wrapping maps from `R^k ≅ T_{p0}M` onto the manifold.
//!
//! Three variants are supported:
//!
//! * `ExpParallelTransport`: `u -> exp_p(PT_{p0->p}(u, 0))`;
//! * `IsometryExp`: `u -> φ_p(exp_{p0}(u, 0))`;
//! * `IsometryLambert`: `u -> φ_p(L(u))`, with `L` the Lambert equal-area map (k = 2 only).
//!
//! `φ_p` is [`isometry_to`]. Because isometries commute with the exponential
//! map, the first two variants agree point for point.
//!
//! Lambert maps, radius `R` (hyperboloid) or `K` (sphere), `r = |u|`:
//!
//! ```text
//! sphere:      x = u sqrt(1 - r^2 / 4K^2),   z = r^2 / 2K - K,   r < 2K
//! hyperboloid: x = u sqrt(1 + r^2 / 4R^2),   z = R + r^2 / 2R
//! ```
//!
//! The hyperboloid form is the closed form of geodesic radius `2R asinh(r / 2R)`,
//! the law under which discs of area `π r^2` map onto geodesic discs of equal area.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::manifold::{isometry_to, IsometryMatrix, Kind, ManifoldId, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantTag {
    ExpParallelTransport,
    IsometryExp,
    IsometryLambert,
}

impl VariantTag {
    pub const ALL: [VariantTag; 3] =
        [VariantTag::ExpParallelTransport, VariantTag::IsometryExp, VariantTag::IsometryLambert];

    pub fn is_lambert(self) -> bool {
        self == VariantTag::IsometryLambert
    }
}

impl std::str::FromStr for VariantTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp_parallel_transport" | "exp-pt" => Ok(Self::ExpParallelTransport),
            "isometry_exp" | "isometry-exp" => Ok(Self::IsometryExp),
            "isometry_lambert" | "lambert" => Ok(Self::IsometryLambert),
            other => Err(invalid(format!("unknown wrapping variant `{other}`"))),
        }
    }
}

/// A wrapping map anchored at `location`. Caches the isometry `φ_p` and its inverse.
#[derive(Debug, Clone)]
pub struct WrappingVariant {
    tag: VariantTag,
    location: Point,
    iso: IsometryMatrix,
    iso_inv: IsometryMatrix,
}

impl WrappingVariant {
    pub fn new(tag: VariantTag, location: Point) -> Result<Self> {
        let m = location.manifold();
        if tag.is_lambert() && m.dim != 2 {
            return Err(invalid(format!("the Lambert variant needs a 2-manifold, got dimension {}", m.dim)));
        }
        let iso = isometry_to(&location).map_err(|_| {
            Error::OutOfDomain("location is antipodal to the base point".into())
        })?;
        let iso_inv = iso.inverse();
        Ok(Self { tag, location, iso, iso_inv })
    }

    /// Same map anchored at the base point `p0`.
    pub fn at_base(tag: VariantTag, manifold: ManifoldId) -> Result<Self> {
        Self::new(tag, manifold.base_point())
    }

    pub fn tag(&self) -> VariantTag {
        self.tag
    }

    pub fn location(&self) -> &Point {
        &self.location
    }

    pub fn manifold(&self) -> ManifoldId {
        self.location.manifold()
    }

    pub fn isometry(&self) -> &IsometryMatrix {
        &self.iso
    }

    /// Same tag, new anchor.
    pub fn relocated(&self, location: Point) -> Result<Self> {
        Self::new(self.tag, location)
    }

    /// Radius of the largest disc in `R^k` on which the map is injective.
    pub fn domain_radius(&self) -> f64 {
        domain_radius(self.tag, self.manifold())
    }
}

pub(crate) fn domain_radius(tag: VariantTag, m: ManifoldId) -> f64 {
    match (m.kind, tag) {
        (Kind::Sphere, VariantTag::IsometryLambert) => 2.0 * m.scale,
        (Kind::Sphere, _) => std::f64::consts::PI * m.scale,
        _ => f64::INFINITY,
    }
}

fn check_lambert_manifold(m: ManifoldId) -> Result<()> {
    if m.dim != 2 {
        return Err(invalid("Lambert maps are defined for 2-manifolds only"));
    }
    Ok(())
}

pub(crate) fn lambert_forward_raw(m: ManifoldId, u: &[f64]) -> Result<DVector<f64>> {
    let s = m.scale;
    let r2 = u[0] * u[0] + u[1] * u[1];
    match m.kind {
        Kind::Hyperboloid => {
            let stretch = (1.0 + r2 / (4.0 * s * s)).sqrt();
            Ok(DVector::from_vec(vec![u[0] * stretch, u[1] * stretch, s + r2 / (2.0 * s)]))
        }
        Kind::Sphere => {
            if r2.sqrt() >= 2.0 * s {
                return Err(Error::OutOfDomain(format!("|u| = {} must be below 2K = {}", r2.sqrt(), 2.0 * s)));
            }
            let shrink = (1.0 - r2 / (4.0 * s * s)).sqrt();
            Ok(DVector::from_vec(vec![u[0] * shrink, u[1] * shrink, r2 / (2.0 * s) - s]))
        }
        Kind::Euclidean => Ok(DVector::from_column_slice(u)),
    }
}

pub(crate) fn lambert_inverse_raw(m: ManifoldId, z: &DVector<f64>) -> Result<[f64; 2]> {
    let s = m.scale;
    let (x, y) = (z[0], z[1]);
    match m.kind {
        Kind::Hyperboloid => {
            let s2 = x * x + y * y;
            // r^2 = 2R^2 (sqrt(1 + s^2/R^2) - 1), written without cancellation
            let r2 = 2.0 * s2 / ((1.0 + s2 / (s * s)).sqrt() + 1.0);
            let stretch = (1.0 + r2 / (4.0 * s * s)).sqrt();
            Ok([x / stretch, y / stretch])
        }
        Kind::Sphere => {
            let h = z[2];
            // shrink^2 = 1 - r^2/4K^2 = (K - z)/2K
            let shrink2 = (s - h) / (2.0 * s);
            if shrink2 <= 1e-24 || (x == 0.0 && y == 0.0 && h > 0.0) {
                return Err(Error::OutOfDomain("the antipode of the base point has no Lambert preimage".into()));
            }
            let shrink = shrink2.sqrt();
            Ok([x / shrink, y / shrink])
        }
        Kind::Euclidean => Ok([x, y]),
    }
}

/// Lambert equal-area map from the plane onto the 2-manifold, anchored at `p0`.
pub fn lambert_forward(manifold: ManifoldId, u: [f64; 2]) -> Result<Point> {
    check_lambert_manifold(manifold)?;
    Ok(manifold.settle(lambert_forward_raw(manifold, &u)?))
}

pub fn lambert_inverse(manifold: ManifoldId, z: &Point) -> Result<[f64; 2]> {
    check_lambert_manifold(manifold)?;
    if z.manifold() != manifold {
        return Err(invalid("point lives on a different manifold"));
    }
    lambert_inverse_raw(manifold, z.coords())
}

fn check_u(variant: &WrappingVariant, u: &[f64]) -> Result<f64> {
    let m = variant.manifold();
    if u.len() != m.dim {
        return Err(invalid(format!("expected {} chart coordinates, got {}", m.dim, u.len())));
    }
    let r = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let limit = variant.domain_radius();
    if !(r < limit) {
        return Err(Error::OutOfDomain(format!("|u| = {r} exceeds the injectivity radius {limit}")));
    }
    Ok(r)
}

pub(crate) fn wrap_raw(variant: &WrappingVariant, u: &[f64]) -> Result<DVector<f64>> {
    check_u(variant, u)?;
    let m = variant.manifold();
    let mut v = DVector::zeros(m.ambient_dim());
    v.rows_mut(0, m.dim).copy_from_slice(u);
    match variant.tag {
        VariantTag::ExpParallelTransport => {
            let p = variant.location.coords();
            let w = m.transport_raw(&m.base_coords(), p, &v)?;
            Ok(m.exp_raw(p, &w))
        }
        VariantTag::IsometryExp => {
            let x = m.exp_raw(&m.base_coords(), &v);
            Ok(variant.iso.apply_raw(&x))
        }
        VariantTag::IsometryLambert => {
            let x = lambert_forward_raw(m, u)?;
            Ok(variant.iso.apply_raw(&x))
        }
    }
}

/// Maps chart coordinates `u ∈ R^k` onto the manifold.
pub fn wrap(variant: &WrappingVariant, u: &[f64]) -> Result<Point> {
    Ok(variant.manifold().settle(wrap_raw(variant, u)?))
}

pub(crate) fn unwrap_raw(variant: &WrappingVariant, z: &DVector<f64>) -> Result<DVector<f64>> {
    let m = variant.manifold();
    let k = m.dim;
    let undefined = |_| Error::OutOfDomain("point is antipodal to the wrapping location".into());
    let full = match variant.tag {
        VariantTag::ExpParallelTransport => {
            let p = variant.location.coords();
            let v = m.log_raw(p, z).map_err(undefined)?;
            m.transport_raw(p, &m.base_coords(), &v).map_err(undefined)?
        }
        VariantTag::IsometryExp => {
            let y = variant.iso_inv.apply_raw(z);
            m.log_raw(&m.base_coords(), &y).map_err(undefined)?
        }
        VariantTag::IsometryLambert => {
            let y = variant.iso_inv.apply_raw(z);
            let u = lambert_inverse_raw(m, &y)?;
            return Ok(DVector::from_vec(u.to_vec()));
        }
    };
    Ok(full.rows(0, k).into_owned())
}

/// Inverse of [`wrap`].
pub fn unwrap(variant: &WrappingVariant, z: &Point) -> Result<Vec<f64>> {
    if z.manifold() != variant.manifold() {
        return Err(invalid("point lives on a different manifold"));
    }
    Ok(unwrap_raw(variant, z.coords())?.iter().copied().collect())
}

/// `ln(sinh x / x)`, accurate at both ends.
pub(crate) fn ln_sinhc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 180.0
    } else if x < 20.0 {
        (x.sinh() / x).ln()
    } else {
        x - std::f64::consts::LN_2 - x.ln() + (-(-2.0 * x).exp()).ln_1p()
    }
}

/// `ln(sin x / x)` for `|x| < π`.
pub(crate) fn ln_sinc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        let x2 = x * x;
        -x2 / 6.0 - x2 * x2 / 180.0
    } else {
        (x.sin() / x).ln()
    }
}

pub(crate) fn log_det_jacobian_norm(tag: VariantTag, m: ManifoldId, r: f64) -> f64 {
    if tag.is_lambert() {
        return 0.0;
    }
    let km1 = (m.dim - 1) as f64;
    match m.kind {
        Kind::Hyperboloid => km1 * ln_sinhc(r / m.scale),
        Kind::Sphere => km1 * ln_sinc(r / m.scale),
        Kind::Euclidean => 0.0,
    }
}

/// `ln |det D wrap(u)|` with respect to the Riemannian volume.
pub fn log_det_jacobian(variant: &WrappingVariant, u: &[f64]) -> Result<f64> {
    let r = check_u(variant, u)?;
    Ok(log_det_jacobian_norm(variant.tag, variant.manifold(), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h2() -> ManifoldId {
        ManifoldId::hyperboloid(2, 1.0).unwrap()
    }

    fn s2() -> ManifoldId {
        ManifoldId::sphere(2, 1.0).unwrap()
    }

    #[test]
    fn lambert_forward_examples() {
        let p = lambert_forward(s2(), [0.0, 0.0]).unwrap();
        assert_eq!(p.to_vec(), vec![0.0, 0.0, -1.0]);
        let p = lambert_forward(s2(), [2f64.sqrt(), 0.0]).unwrap();
        assert_abs_diff_eq!(p.coords()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coords()[2], 0.0, epsilon = 1e-15);
        let r = 2.0 * 0.5f64.sinh();
        let q = lambert_forward(h2(), [r, 0.0]).unwrap();
        assert_abs_diff_eq!(q.coords()[0], 1f64.sinh(), epsilon = 1e-14);
        assert_abs_diff_eq!(q.coords()[2], 1f64.cosh(), epsilon = 1e-14);
        assert!(matches!(lambert_forward(s2(), [2.0, 0.0]), Err(Error::OutOfDomain(_))));
        let h3 = ManifoldId::hyperboloid(3, 1.0).unwrap();
        assert!(lambert_forward(h3, [0.1, 0.1]).is_err());
    }

    #[test]
    fn lambert_inverse_examples() {
        assert_eq!(lambert_inverse(s2(), &s2().base_point()).unwrap(), [0.0, 0.0]);
        let east = Point::new(s2(), vec![1.0, 0.0, 0.0]).unwrap();
        let u = lambert_inverse(s2(), &east).unwrap();
        assert_abs_diff_eq!(u[0], 2f64.sqrt(), epsilon = 1e-15);
        let north = Point::new(s2(), vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(lambert_inverse(s2(), &north), Err(Error::OutOfDomain(_))));
        // near the antipode the preimage approaches the boundary circle
        let near = lambert_forward(s2(), [1.999, 0.0]).unwrap();
        assert_abs_diff_eq!(lambert_inverse(s2(), &near).unwrap()[0], 1.999, epsilon = 1e-9);
    }

    #[test]
    fn wrap_examples() {
        let v = WrappingVariant::at_base(VariantTag::ExpParallelTransport, h2()).unwrap();
        let z = wrap(&v, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(z.coords()[0], 1f64.sinh(), epsilon = 1e-14);
        assert_abs_diff_eq!(z.coords()[2], 1f64.cosh(), epsilon = 1e-14);
        let u = unwrap(&v, &z).unwrap();
        assert_abs_diff_eq!(u[0], 1.0, epsilon = 1e-12);

        let loc = Point::new(s2(), vec![0.6, 0.0, -0.8]).unwrap();
        for tag in VariantTag::ALL {
            let w = WrappingVariant::new(tag, loc.clone()).unwrap();
            assert!((wrap(&w, &[0.0, 0.0]).unwrap().coords() - loc.coords()).amax() < 1e-15);
            assert_eq!(unwrap(&w, &loc).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn wrap_domain_errors() {
        let lam = WrappingVariant::at_base(VariantTag::IsometryLambert, s2()).unwrap();
        assert!(matches!(wrap(&lam, &[2.5, 0.0]), Err(Error::OutOfDomain(_))));
        let exp = WrappingVariant::at_base(VariantTag::IsometryExp, s2()).unwrap();
        assert!(matches!(wrap(&exp, &[3.2, 0.0]), Err(Error::OutOfDomain(_))));
        let antipode = Point::new(s2(), vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(unwrap(&exp, &antipode), Err(Error::OutOfDomain(_))));
        assert!(WrappingVariant::new(VariantTag::IsometryLambert, antipode).is_err());
        let h3 = ManifoldId::hyperboloid(3, 1.0).unwrap();
        assert!(WrappingVariant::at_base(VariantTag::IsometryLambert, h3).is_err());
    }

    #[test]
    fn log_det_examples() {
        let v = WrappingVariant::at_base(VariantTag::ExpParallelTransport, h2()).unwrap();
        assert_eq!(log_det_jacobian(&v, &[0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(log_det_jacobian(&v, &[0.6, 0.8]).unwrap(), 0.161_439_361_8, epsilon = 1e-9);
        let l = WrappingVariant::at_base(VariantTag::IsometryLambert, h2()).unwrap();
        assert_eq!(log_det_jacobian(&l, &[3.0, -7.0]).unwrap(), 0.0);
    }

    #[test]
    fn ln_sinhc_branches_agree() {
        for &x in &[9.99e-4f64, 1.001e-3, 19.999, 20.001] {
            let direct = (x.sinh() / x).ln();
            assert_abs_diff_eq!(ln_sinhc(x), direct, epsilon = 1e-12 * direct.abs().max(1e-6));
        }
        assert!(ln_sinhc(800.0).is_finite());
    }
}
