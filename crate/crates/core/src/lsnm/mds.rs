use nalgebra::{DMatrix, SymmetricEigen};

use super::graph::Graph;
use super::model::proposal_tag;
use crate::chart::{wrap, WrappingVariant};
use crate::error::Result;
use crate::manifold::{Kind, ManifoldId, Point};

/// Initial latent positions from classical MDS of hop distances.
///
/// The largest connected component is embedded in `R^k` (top `k` principal
/// coordinates of the double-centred squared distance matrix), rescaled to
/// RMS norm 1 with a fixed sign convention, and wrapped at the base point.
/// On the sphere the configuration is shrunk, if needed, so that it stays in
/// the open upper hemisphere. Nodes outside the component, and every node
/// when `n < 3`, sit at the base point.
pub fn mds_init(graph: &Graph, manifold: ManifoldId) -> Result<Vec<Point>> {
    let n = graph.n();
    let p0 = manifold.base_point();
    let mut out = vec![p0; n];
    let comp = graph.largest_component();
    if n < 3 || comp.len() < 2 {
        return Ok(out);
    }
    let c = comp.len();
    let k = manifold.dim;

    let mut d2 = DMatrix::zeros(c, c);
    for (a, &i) in comp.iter().enumerate() {
        let hops = graph.shortest_paths(i);
        for (b, &j) in comp.iter().enumerate() {
            let h = hops[j].unwrap_or(0) as f64;
            d2[(a, b)] = h * h;
        }
    }
    let centre = DMatrix::identity(c, c) - DMatrix::from_element(c, c, 1.0 / c as f64);
    let b = &centre * d2 * &centre * -0.5;
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

    let mut coords = DMatrix::zeros(c, k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let mut v = eig.eigenvectors.column(idx) * lambda.sqrt();
        // sign convention: the largest-magnitude entry is positive
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc });
        if pivot < 0.0 {
            v = -v;
        }
        coords.set_column(col, &v);
    }
    let rms = (coords.norm_squared() / c as f64).sqrt();
    if rms > 0.0 {
        coords /= rms;
    }
    if manifold.kind == Kind::Sphere {
        let limit = 0.9 * manifold.scale * if k == 2 { 2f64.sqrt() } else { std::f64::consts::FRAC_PI_2 };
        let max = coords.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
        if max > limit {
            coords *= limit / max;
        }
    }
    let v = WrappingVariant::at_base(proposal_tag(manifold), manifold)?;
    for (a, &i) in comp.iter().enumerate() {
        let u: Vec<f64> = coords.row(a).iter().copied().collect();
        out[i] = wrap(&v, &u)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::geodesic_distance;

    fn all_manifolds() -> Vec<ManifoldId> {
        vec![
            ManifoldId::hyperboloid(2, 1.0).unwrap(),
            ManifoldId::sphere(2, 1.0).unwrap(),
            ManifoldId::hyperboloid(3, 1.0).unwrap(),
        ]
    }

    #[test]
    fn triangle_is_equilateral() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        for m in all_manifolds() {
            let z = mds_init(&g, m).unwrap();
            let d = [
                geodesic_distance(&z[0], &z[1]).unwrap(),
                geodesic_distance(&z[1], &z[2]).unwrap(),
                geodesic_distance(&z[0], &z[2]).unwrap(),
            ];
            let (lo, hi) = (d.iter().cloned().fold(f64::INFINITY, f64::min), d.iter().cloned().fold(0.0, f64::max));
            assert!((hi - lo) / hi < 0.05, "{m:?}: {d:?}");
        }
    }

    #[test]
    fn path_is_nearly_collinear() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        for m in all_manifolds() {
            let z = mds_init(&g, m).unwrap();
            let d01 = geodesic_distance(&z[0], &z[1]).unwrap();
            let d12 = geodesic_distance(&z[1], &z[2]).unwrap();
            let d02 = geodesic_distance(&z[0], &z[2]).unwrap();
            assert!(d01 + d12 - d02 < 0.1 * d02, "{m:?}");
        }
    }

    #[test]
    fn small_and_disconnected_graphs() {
        let m = ManifoldId::hyperboloid(2, 1.0).unwrap();
        let two = mds_init(&Graph::new(2, &[(0, 1)]).unwrap(), m).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|p| p.coords() == m.base_point().coords()));
        let g = Graph::new(5, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let z = mds_init(&g, m).unwrap();
        assert_eq!(z[3].coords(), m.base_point().coords());
        assert!(geodesic_distance(&z[0], &z[1]).unwrap() > 0.1);
    }

    #[test]
    fn deterministic() {
        let g = Graph::parse_edge_list(include_str!("../../data/florentine.csv")).unwrap();
        let m = ManifoldId::sphere(2, 1.0).unwrap();
        let a = mds_init(&g, m).unwrap();
        let b = mds_init(&g, m).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.coords() == y.coords()));
    }
}
