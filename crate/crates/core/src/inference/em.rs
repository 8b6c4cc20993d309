use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::location::{estimate_location_weighted, extrinsic_mean, LocationFit, SigmaPolicy};
use crate::chart::{VariantTag, WrappingVariant};
use crate::dist::{log_sum_exp, wn_log_pdf, CovarianceSpec, MixtureParams, WrappedNormalParams};
use crate::error::{invalid, Error, Result};
use crate::manifold::{geodesic_distance, Point};

#[derive(Debug, Clone, Copy)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop when the relative log-likelihood improvement falls below this.
    pub tol: f64,
    pub max_reseeds: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-8, max_reseeds: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub mixture: MixtureParams,
    pub log_likelihood: f64,
    /// Log-likelihood after every completed iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub reseeds: usize,
    pub converged: bool,
}

// tolerance for the monotonicity check, relative to |log-likelihood|
const MONOTONE_SLACK: f64 = 1e-9;

/// Fits a `q`-component wrapped-normal mixture by EM with default settings.
pub fn em_fit<R: Rng + ?Sized>(samples: &[Point], q: usize, tag: VariantTag, rng: &mut R) -> Result<EmFit> {
    em_fit_with(samples, q, tag, &EmConfig::default(), rng)
}

pub fn em_fit_with<R: Rng + ?Sized>(
    samples: &[Point],
    q: usize,
    tag: VariantTag,
    config: &EmConfig,
    rng: &mut R,
) -> Result<EmFit> {
    if q == 0 {
        return Err(invalid("need at least one component"));
    }
    let Some(first) = samples.first() else { return Err(invalid("no samples")) };
    let m = first.manifold();
    if samples.iter().any(|y| y.manifold() != m) {
        return Err(invalid("samples live on different manifolds"));
    }
    if samples.len() < q * (m.dim + 1) {
        return Err(invalid(format!("{} samples cannot support {q} components in dimension {}", samples.len(), m.dim)));
    }

    let centres = kmeans_pp(samples, q, rng)?;
    let mut resp = hard_assign(samples, &centres)?;
    let mut state = State { components: Vec::new(), weights: Vec::new() };
    let mut reseeds = 0;
    let mut starts: Vec<Point> = centres;
    state = m_step(samples, &resp, tag, &starts, state, &mut reseeds, config)?;

    let mut ll = e_step(samples, &state, &mut resp)?;
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        starts = state.components.iter().map(|c| c.variant().location().clone()).collect();
        let before = reseeds;
        let candidate = m_step(samples, &resp, tag, &starts, state.clone(), &mut reseeds, config)?;
        let mut new_resp = resp.clone();
        let new_ll = e_step(samples, &candidate, &mut new_resp)?;
        let reseeded = reseeds > before;
        if !reseeded && new_ll < ll - MONOTONE_SLACK * ll.abs().max(1.0) {
            // the inexact location step lost ground: keep the previous fit
            converged = true;
            break;
        }
        let gain = new_ll - ll;
        state = candidate;
        resp = new_resp;
        ll = new_ll;
        trace.push(ll);
        if !reseeded && gain.abs() <= config.tol * ll.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let mixture = MixtureParams::new(state.weights, state.components)?;
    Ok(EmFit { mixture, log_likelihood: ll, trace, iterations, reseeds, converged })
}

#[derive(Clone)]
struct State {
    components: Vec<WrappedNormalParams>,
    weights: Vec<f64>,
}

fn kmeans_pp<R: Rng + ?Sized>(samples: &[Point], q: usize, rng: &mut R) -> Result<Vec<Point>> {
    let mut centres = vec![samples[rng.random_range(0..samples.len())].clone()];
    let mut d2: Vec<f64> = samples.iter().map(|y| dist2(y, &centres[0])).collect();
    while centres.len() < q {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every sample coincides with a centre
            Err(_) => rng.random_range(0..samples.len()),
        };
        let c = samples[next].clone();
        for (d, y) in d2.iter_mut().zip(samples) {
            *d = d.min(dist2(y, &c));
        }
        centres.push(c);
    }
    Ok(centres)
}

fn dist2(a: &Point, b: &Point) -> f64 {
    geodesic_distance(a, b).map_or(f64::INFINITY, |d| d * d)
}

fn hard_assign(samples: &[Point], centres: &[Point]) -> Result<DMatrix<f64>> {
    let mut r = DMatrix::zeros(samples.len(), centres.len());
    for (i, y) in samples.iter().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (j, c) in centres.iter().enumerate() {
            let d = dist2(y, c);
            if d < best.1 {
                best = (j, d);
            }
        }
        r[(i, best.0)] = 1.0;
    }
    Ok(r)
}

// fills `resp` with posterior responsibilities; returns the log-likelihood
fn e_step(samples: &[Point], state: &State, resp: &mut DMatrix<f64>) -> Result<f64> {
    let q = state.components.len();
    let log_w: Vec<f64> = state.weights.iter().map(|w| w.ln()).collect();
    let mut total = 0.0;
    let mut row = vec![0.0; q];
    for (i, y) in samples.iter().enumerate() {
        for j in 0..q {
            row[j] = log_w[j] + wn_log_pdf(&state.components[j], y)?;
        }
        let lse = log_sum_exp(&row);
        if lse == f64::NEG_INFINITY {
            // outside every component's support: spread evenly
            resp.row_mut(i).fill(1.0 / q as f64);
            total = f64::NEG_INFINITY;
            continue;
        }
        for j in 0..q {
            resp[(i, j)] = (row[j] - lse).exp();
        }
        total += lse;
    }
    Ok(total)
}

fn m_step(
    samples: &[Point],
    resp: &DMatrix<f64>,
    tag: VariantTag,
    starts: &[Point],
    previous: State,
    reseeds: &mut usize,
    config: &EmConfig,
) -> Result<State> {
    let q = resp.ncols();
    let k = samples[0].manifold().dim;
    let mut fitted: Vec<Option<WrappedNormalParams>> = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for j in 0..q {
        let w: Vec<f64> = resp.column(j).iter().copied().collect();
        let mass: f64 = w.iter().sum();
        weights.push(mass / samples.len() as f64);
        if mass < (k + 1) as f64 {
            fitted.push(None);
            continue;
        }
        let fit = estimate_location_weighted(samples, Some(&w), tag, &SigmaPolicy::Profile, Some(&starts[j]))?;
        fitted.push(component(fit, tag).ok());
    }
    if fitted.iter().all(Option::is_some) {
        let components = fitted.into_iter().map(Option::unwrap).collect();
        return Ok(State { components, weights });
    }

    // re-seed empty or degenerate components
    let spare_sigma = pooled_sigma(&fitted, samples, k)?;
    let mut worst: Vec<usize> = lowest_likelihood_order(samples, &previous);
    let mut components = Vec::with_capacity(q);
    for (j, f) in fitted.into_iter().enumerate() {
        match f {
            Some(c) => components.push(c),
            None => {
                *reseeds += 1;
                if *reseeds > config.max_reseeds {
                    return Err(Error::DegenerateMixture(format!(
                        "component {j} collapsed after {} re-seeds",
                        config.max_reseeds
                    )));
                }
                let seed = worst.pop().map_or_else(|| samples[j % samples.len()].clone(), |i| samples[i].clone());
                let v = WrappingVariant::new(tag, seed)?;
                components.push(WrappedNormalParams::new(v, spare_sigma.clone())?);
                weights[j] = weights[j].max(1.0 / q as f64);
            }
        }
    }
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);
    Ok(State { components, weights })
}

fn component(fit: LocationFit, tag: VariantTag) -> Result<WrappedNormalParams> {
    let sigma = fit.sigma.covariance()?;
    WrappedNormalParams::new(WrappingVariant::new(tag, fit.point)?, sigma)
}

// covariance for a re-seeded component: average of the healthy ones, or the
// spread of the whole sample about its extrinsic mean
fn pooled_sigma(fitted: &[Option<WrappedNormalParams>], samples: &[Point], k: usize) -> Result<CovarianceSpec> {
    let healthy: Vec<&WrappedNormalParams> = fitted.iter().flatten().collect();
    if !healthy.is_empty() {
        let sum = healthy.iter().fold(DMatrix::zeros(k, k), |acc, c| acc + c.sigma().matrix());
        return CovarianceSpec::new(sum / healthy.len() as f64);
    }
    let w = vec![1.0; samples.len()];
    let centre = extrinsic_mean(samples, &w).unwrap_or_else(|| samples[0].clone());
    let mean_d2 = samples.iter().map(|y| dist2(y, &centre)).filter(|d| d.is_finite()).sum::<f64>() / samples.len() as f64;
    CovarianceSpec::isotropic(k, (mean_d2 / k as f64).max(1e-6))
}

// sample indices ordered so that `pop` yields the worst-fitting sample
fn lowest_likelihood_order(samples: &[Point], state: &State) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = samples
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let row: Vec<f64> = state
                .components
                .iter()
                .zip(&state.weights)
                .map(|(c, w)| w.ln() + wn_log_pdf(c, y).unwrap_or(f64::NEG_INFINITY))
                .collect();
            (i, if row.is_empty() { 0.0 } else { log_sum_exp(&row) })
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.into_iter().map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::wn_sample;
    use crate::manifold::ManifoldId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_input() {
        let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = h2.base_point();
        assert!(em_fit(&vec![p.clone(); 5], 2, VariantTag::IsometryLambert, &mut rng).is_err());
        assert!(em_fit(&vec![p; 5], 0, VariantTag::IsometryLambert, &mut rng).is_err());
        assert!(em_fit(&[], 1, VariantTag::IsometryLambert, &mut rng).is_err());
    }

    #[test]
    fn single_component_matches_direct_estimates() {
        let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
        let v = WrappingVariant::at_base(VariantTag::IsometryLambert, h2).unwrap();
        let params = WrappedNormalParams::new(v, CovarianceSpec::diagonal(&[0.2, 0.1]).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ys = wn_sample(&params, &mut rng, 500).unwrap();
        let fit = em_fit(&ys, 1, VariantTag::IsometryLambert, &mut rng).unwrap();
        let c = &fit.mixture.components()[0];
        let direct = super::super::estimate_location(&ys, VariantTag::IsometryLambert, &SigmaPolicy::Profile).unwrap();
        assert!(geodesic_distance(c.variant().location(), &direct).unwrap() < 1e-4);
        for w in fit.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs());
        }
    }
}
