use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::manifold::{Kind, ManifoldId, Point};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Area (volume) scaling of `map` at `u`.
///
/// The ambient partial derivatives `∂_i x` are taken by central differences
/// and paired with the ambient form, which restricted to the tangent space is
/// the Riemannian metric; the result is `sqrt(det G)` with `G_ij = <∂_i x, ∂_j x>`,
/// i.e. the Jacobian determinant in an orthonormal frame at the image point.
pub fn fd_jacobian_det<F>(map: F, u: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Point>,
{
    if !(h > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let k = u.len();
    let mut partials: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut manifold: Option<ManifoldId> = None;
    for i in 0..k {
        let at = |offset: f64| -> Result<Point> {
            let mut v = u.to_vec();
            v[i] += offset;
            map(&v).map_err(|e| invalid(format!("map undefined within 2h of u: {e}")))
        };
        // margin: the map must be defined two steps out
        at(2.0 * h)?;
        at(-2.0 * h)?;
        let plus = at(h)?;
        let minus = at(-h)?;
        manifold.get_or_insert(plus.manifold());
        partials.push((plus.coords() - minus.coords()) / (2.0 * h));
    }
    let m = manifold.ok_or_else(|| invalid("empty argument"))?;
    let gram = DMatrix::from_fn(k, k, |a, b| ambient_form(m, &partials[a], &partials[b]));
    Ok(gram.determinant().max(0.0).sqrt())
}

fn ambient_form(m: ManifoldId, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    match m.kind {
        Kind::Hyperboloid => {
            let n = x.len();
            x.rows(0, n - 1).dot(&y.rows(0, n - 1)) - x[n - 1] * y[n - 1]
        }
        _ => x.dot(y),
    }
}

// second-order system for (position, velocity, carried vector)
fn derivative(m: ManifoldId, x: &DVector<f64>, dx: &DVector<f64>, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let s2 = m.scale * m.scale;
    match m.kind {
        Kind::Hyperboloid => (x * (ambient_form(m, dx, dx) / s2), x * (ambient_form(m, w, dx) / s2)),
        Kind::Sphere => (x * (-dx.dot(dx) / s2), x * (-w.dot(dx) / s2)),
        Kind::Euclidean => (DVector::zeros(x.len()), DVector::zeros(x.len())),
    }
}

// classical RK4 on the geodesic equation with a vector carried along
fn integrate(m: ManifoldId, x0: &DVector<f64>, v0: &DVector<f64>, w0: &DVector<f64>, steps: usize) -> (DVector<f64>, DVector<f64>) {
    let dt = 1.0 / steps as f64;
    let (mut x, mut v, mut w) = (x0.clone(), v0.clone(), w0.clone());
    for _ in 0..steps {
        let (a1, b1) = derivative(m, &x, &v, &w);
        let (x2, v2, w2) = (&x + &v * (dt / 2.0), &v + &a1 * (dt / 2.0), &w + &b1 * (dt / 2.0));
        let (a2, b2) = derivative(m, &x2, &v2, &w2);
        let (x3, v3, w3) = (&x + &v2 * (dt / 2.0), &v + &a2 * (dt / 2.0), &w + &b2 * (dt / 2.0));
        let (a3, b3) = derivative(m, &x3, &v3, &w3);
        let (x4, v4, w4) = (&x + &v3 * dt, &v + &a3 * dt, &w + &b3 * dt);
        let (a4, b4) = derivative(m, &x4, &v4, &w4);
        x += (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
        w += (&b1 + &b2 * 2.0 + &b3 * 2.0 + &b4) * (dt / 6.0);
        v += (&a1 + &a2 * 2.0 + &a3 * 2.0 + &a4) * (dt / 6.0);
    }
    (x, w)
}

/// Endpoint at time 1 of the geodesic from `p` with ambient initial velocity `v`.
pub fn integrate_geodesic(p: &Point, v: &[f64], steps: usize) -> DVector<f64> {
    let v = DVector::from_column_slice(v);
    integrate(p.manifold(), p.coords(), &v, &v, steps).0
}

/// Carries `w` along the geodesic leaving `p` with velocity `v`, by integrating
/// the transport equation; returns the vector at time 1.
pub fn transport_by_integration(p: &Point, v: &[f64], w: &[f64], steps: usize) -> DVector<f64> {
    let v = DVector::from_column_slice(v);
    let w = DVector::from_column_slice(w);
    integrate(p.manifold(), p.coords(), &v, &w, steps).1
}

/// The matrix `[e_1 | .. | e_k | p]`, which maps `p0` to `p` on the unit
/// hyperboloid but generally fails to preserve the Minkowski form.
pub fn literal_isometry_matrix(p: &Point) -> DMatrix<f64> {
    let n = p.coords().len();
    let mut a = DMatrix::identity(n, n);
    let col = p.coords() / p.manifold().scale;
    a.set_column(n - 1, &col);
    a
}
