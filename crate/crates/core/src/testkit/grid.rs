use rand::Rng;

use super::oracles::{fd_jacobian_det, FD_STEP};
use crate::chart::{lambert_forward, unwrap_raw, wrap, WrappingVariant};
use crate::dist::{wn_log_pdf, wn_sample, WrappedNormalParams};
use crate::error::{invalid, Error, Result};
use crate::manifold::apply_isometry;

/// Upper bound on the number of grid points.
pub const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    fn node(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.min && x < self.max) {
            return None;
        }
        let b = ((x - self.min) / (self.max - self.min) * self.count as f64) as usize;
        Some(b.min(self.count - 1))
    }

    fn bin_width(&self) -> f64 {
        (self.max - self.min) / self.count as f64
    }
}

/// A tensor grid. For quadrature `count` is the number of nodes per axis
/// (endpoints included); for histograms it is the number of bins.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("grid needs at least one axis"));
        }
        for a in &axes {
            if a.count < 2 || !(a.min < a.max) {
                return Err(invalid(format!("bad axis {a:?}: need count >= 2 and min < max")));
            }
        }
        let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.count)).unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge(total));
        }
        Ok(Self { axes })
    }

    /// Square grid `[-half, half]^dim`.
    pub fn square(dim: usize, half: f64, count: usize) -> Result<Self> {
        Self::new(vec![Axis::new(-half, half, count); dim])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let i = flat % a.count;
                flat /= a.count;
                i
            })
            .collect()
    }
}

/// Trapezoid rule for `f` over the grid nodes.
pub fn grid_integral<F: Fn(&[f64]) -> f64>(f: F, grid: &GridSpec) -> f64 {
    let cell: f64 = grid.axes.iter().map(|a| a.spacing()).product();
    let mut acc = 0.0;
    let mut x = vec![0.0; grid.axes.len()];
    for flat in 0..grid.len() {
        let idx = grid.multi_index(flat);
        let mut w = 1.0;
        for (d, (a, &i)) in grid.axes.iter().zip(&idx).enumerate() {
            x[d] = a.node(i);
            if i == 0 || i == a.count - 1 {
                w *= 0.5;
            }
        }
        let v = f(&x);
        if v != 0.0 {
            acc += w * v;
        }
    }
    acc * cell
}

/// Total mass of a 2-dimensional wrapped normal, integrated over the manifold
/// in the Lambert chart anchored at the distribution's location. The area
/// element is measured by finite differences, not assumed.
pub fn grid_normalization(params: &WrappedNormalParams, grid: &GridSpec) -> Result<f64> {
    let m = params.variant().manifold();
    if m.dim != 2 || grid.axes.len() != 2 {
        return Err(invalid("grid normalisation is implemented for 2-manifolds"));
    }
    let iso = params.variant().isometry().clone();
    let chart = |s: &[f64]| lambert_forward(m, [s[0], s[1]]).and_then(|x| apply_isometry(&iso, &x));
    let f = |s: &[f64]| -> f64 {
        let Ok(z) = chart(s) else { return 0.0 };
        let lp = wn_log_pdf(params, &z).unwrap_or(f64::NEG_INFINITY);
        // exp underflows to zero
        if lp < -745.0 {
            return 0.0;
        }
        match fd_jacobian_det(chart, s, FD_STEP) {
            Ok(area) => lp.exp() * area,
            Err(_) => 0.0,
        }
    };
    Ok(grid_integral(f, grid))
}

fn histogram(points: &[Vec<f64>], bins: &GridSpec) -> (Vec<f64>, f64) {
    let mut counts = vec![0.0; bins.len()];
    let mut outside = 0.0;
    let w = 1.0 / points.len() as f64;
    'outer: for p in points {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &x) in bins.axes.iter().zip(p) {
            match a.bin_of(x) {
                Some(b) => flat += b * stride,
                None => {
                    outside += w;
                    continue 'outer;
                }
            }
            stride *= a.count;
        }
        counts[flat] += w;
    }
    (counts, outside)
}

fn tv(p: &[f64], p_out: f64, q: &[f64], q_out: f64) -> f64 {
    0.5 * (p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() + (p_out - q_out).abs())
}

/// Total-variation distance between the histograms of two point sets
/// (mass outside the grid forms one extra cell).
pub fn histogram_tv(a: &[Vec<f64>], b: &[Vec<f64>], bins: &GridSpec) -> f64 {
    let (ha, oa) = histogram(a, bins);
    let (hb, ob) = histogram(b, bins);
    tv(&ha, oa, &hb, ob)
}

const SUB: usize = 6;

// analytic mass of each bin: the manifold density pulled back through the
// wrap, times the finite-difference area element, midpoint rule per bin
fn analytic_bins(density: &WrappedNormalParams, bins: &GridSpec) -> Result<Vec<f64>> {
    if bins.axes.len() != 2 {
        return Err(invalid("analytic binning is implemented for 2-manifolds"));
    }
    let v: &WrappingVariant = density.variant();
    let (ax, ay) = (bins.axes[0], bins.axes[1]);
    let (wx, wy) = (ax.bin_width(), ay.bin_width());
    let sub_area = wx * wy / (SUB * SUB) as f64;
    let mut out = vec![0.0; bins.len()];
    for j in 0..ay.count {
        for i in 0..ax.count {
            let mut acc = 0.0;
            for sj in 0..SUB {
                for si in 0..SUB {
                    let u = [
                        ax.min + wx * (i as f64 + (si as f64 + 0.5) / SUB as f64),
                        ay.min + wy * (j as f64 + (sj as f64 + 0.5) / SUB as f64),
                    ];
                    let Ok(z) = wrap(v, &u) else { continue };
                    let lp = wn_log_pdf(density, &z)?;
                    if lp == f64::NEG_INFINITY {
                        continue;
                    }
                    if let Ok(area) = fd_jacobian_det(|w| wrap(v, w), &u, FD_STEP) {
                        acc += lp.exp() * area;
                    }
                }
            }
            out[i + j * ax.count] = acc * sub_area;
        }
    }
    Ok(out)
}

/// TV distance between `n` samples of `sampler` (histogrammed in the chart
/// coordinates of `density`) and the binned analytic mass of `density`.
pub fn pushforward_tv_against<R: Rng + ?Sized>(
    sampler: &WrappedNormalParams,
    density: &WrappedNormalParams,
    n: usize,
    bins: &GridSpec,
    rng: &mut R,
) -> Result<f64> {
    if n == 0 {
        return Err(invalid("need at least one sample"));
    }
    let pts = wn_sample(sampler, rng, n)?;
    let chart: Vec<Vec<f64>> = pts
        .iter()
        .map(|z| unwrap_raw(density.variant(), z.coords()).map(|u| u.iter().copied().collect()))
        .collect::<Result<_>>()?;
    let (emp, emp_out) = histogram(&chart, bins);
    let ana = analytic_bins(density, bins)?;
    let ana_out = (1.0 - ana.iter().sum::<f64>()).max(0.0);
    Ok(tv(&emp, emp_out, &ana, ana_out))
}

pub fn pushforward_tv_distance<R: Rng + ?Sized>(
    params: &WrappedNormalParams,
    n: usize,
    bins: &GridSpec,
    rng: &mut R,
) -> Result<f64> {
    pushforward_tv_against(params, params, n, bins, rng)
}

/// `max |f - g|` over the nodes of a 1-dimensional grid.
pub fn sup_norm_gap<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, grid: &GridSpec) -> f64 {
    let a = grid.axes[0];
    (0..a.count).map(|i| a.node(i)).map(|x| (f(x) - g(x)).abs()).fold(0.0, f64::max)
}
