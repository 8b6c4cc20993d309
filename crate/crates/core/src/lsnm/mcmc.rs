use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use super::mds::mds_init;
use super::model::{network_log_posterior, pair_term, proposal_tag, NetworkState, Priors};
use crate::chart::{wrap_raw, WrappingVariant};
use crate::error::{invalid, Result};
use crate::manifold::{ManifoldId, Point};

/// Acceptance rates outside this band after burn-in produce a warning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.05, 0.8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Classical MDS of shortest-path distances.
    #[default]
    Mds,
    /// Every node at the base point.
    Base,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MhConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub step_pos: f64,
    pub step_alpha: f64,
    pub init: InitMode,
    pub initial_alpha: f64,
}

impl Default for MhConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            burn_in: 10_000,
            thin: 10,
            step_pos: 0.1,
            step_alpha: 0.2,
            init: InitMode::Mds,
            initial_alpha: 0.0,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(invalid("thinning stride must be at least 1"));
        }
        if !(self.step_pos > 0.0 && self.step_alpha > 0.0) {
            return Err(invalid("step sizes must be positive"));
        }
        if !self.initial_alpha.is_finite() {
            return Err(invalid("initial alpha must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub log_posterior: f64,
    pub alpha: f64,
    /// Running acceptance rates since the start of the run.
    pub accept_rate_pos: f64,
    pub accept_rate_alpha: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub thin: usize,
    pub burn_in: usize,
    pub records: Vec<TraceRecord>,
    /// Acceptance rates over the post-burn-in iterations.
    pub post_burn_in_accept_pos: Option<f64>,
    pub post_burn_in_accept_alpha: Option<f64>,
    pub warnings: Vec<String>,
}

impl Trace {
    /// Records with `iteration > burn_in`.
    pub fn post_burn_in(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.iteration > self.burn_in)
    }
}

/// Runs the sampler from the configured initialisation.
pub fn mh_run<R: Rng + ?Sized>(
    graph: &Graph,
    manifold: ManifoldId,
    config: &MhConfig,
    rng: &mut R,
) -> Result<(NetworkState, Trace)> {
    config.validate()?;
    let positions = match config.init {
        InitMode::Mds => mds_init(graph, manifold)?,
        InitMode::Base => vec![manifold.base_point(); graph.n()],
    };
    let state = NetworkState::new(positions, config.initial_alpha, config.step_pos, config.step_alpha)?;
    let priors = Priors::default_for(manifold)?;
    mh_run_from(graph, state, &priors, config, rng)
}

struct Counter {
    tried: u64,
    accepted: u64,
}

impl Counter {
    fn rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

/// Runs the sampler from an explicit state and priors. The state's step
/// sizes are used; `config` supplies iterations, burn-in and thinning.
///
/// One iteration updates every position in turn, then `α`. A position
/// proposal wraps a `N(0, σ_pos² I)` draw at the current point, which is
/// symmetric because its density depends only on the geodesic distance
/// between the two points.
pub fn mh_run_from<R: Rng + ?Sized>(
    graph: &Graph,
    mut state: NetworkState,
    priors: &Priors,
    config: &MhConfig,
    rng: &mut R,
) -> Result<(NetworkState, Trace)> {
    config.validate()?;
    let n = graph.n();
    let mut trace = Trace { thin: config.thin, burn_in: config.burn_in, ..Trace::default() };
    // validates sizes and that the start has positive density
    let lp0 = network_log_posterior(&state, graph, priors)?;
    if config.iterations == 0 || n == 0 {
        return Ok((state, trace));
    }
    if !lp0.is_finite() {
        return Err(invalid("initial state has zero posterior density"));
    }
    let m = state.manifold().ok_or_else(|| invalid("no positions"))?;
    let tag = proposal_tag(m);
    let k = m.dim;

    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = m.distance_raw(state.positions[i].coords(), state.positions[j].coords());
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut prior_pos: Vec<f64> =
        state.positions.iter().map(|z| priors.position_log_density(z)).collect::<Result<_>>()?;

    let (mut pos, mut alp) = (Counter { tried: 0, accepted: 0 }, Counter { tried: 0, accepted: 0 });
    let (mut pos_post, mut alp_post) = (Counter { tried: 0, accepted: 0 }, Counter { tried: 0, accepted: 0 });
    let mut new_d = vec![0.0; n];

    for it in 1..=config.iterations {
        let after_burn_in = it > config.burn_in;
        for i in 0..n {
            let u = DVector::from_fn(k, |_, _| state.step_pos * rng.sample::<f64, _>(StandardNormal));
            let log_u: f64 = rng.random::<f64>().ln();
            pos.tried += 1;
            if after_burn_in {
                pos_post.tried += 1;
            }
            let Some(candidate) = propose(tag, &state.positions[i], u.as_slice()) else { continue };
            let prior_new = priors.position_log_density(&candidate)?;
            if prior_new == f64::NEG_INFINITY {
                continue;
            }
            let mut delta = prior_new - prior_pos[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = m.distance_raw(candidate.coords(), state.positions[j].coords());
                new_d[j] = d;
                let e = graph.has_edge(i, j);
                delta += pair_term(e, state.alpha, d) - pair_term(e, state.alpha, dist[i * n + j]);
            }
            if log_u < delta {
                for j in 0..n {
                    if j != i {
                        dist[i * n + j] = new_d[j];
                        dist[j * n + i] = new_d[j];
                    }
                }
                state.positions[i] = candidate;
                prior_pos[i] = prior_new;
                pos.accepted += 1;
                if after_burn_in {
                    pos_post.accepted += 1;
                }
            }
        }

        let proposal = state.alpha + state.step_alpha * rng.sample::<f64, _>(StandardNormal);
        let log_u: f64 = rng.random::<f64>().ln();
        let mut delta = priors.alpha_log_density(proposal) - priors.alpha_log_density(state.alpha);
        for i in 0..n {
            for j in i + 1..n {
                let e = graph.has_edge(i, j);
                let d = dist[i * n + j];
                delta += pair_term(e, proposal, d) - pair_term(e, state.alpha, d);
            }
        }
        alp.tried += 1;
        if after_burn_in {
            alp_post.tried += 1;
        }
        if log_u < delta {
            state.alpha = proposal;
            alp.accepted += 1;
            if after_burn_in {
                alp_post.accepted += 1;
            }
        }

        if it % config.thin == 0 {
            let mut lp = priors.alpha_log_density(state.alpha) + prior_pos.iter().sum::<f64>();
            for i in 0..n {
                for j in i + 1..n {
                    lp += pair_term(graph.has_edge(i, j), state.alpha, dist[i * n + j]);
                }
            }
            trace.records.push(TraceRecord {
                iteration: it,
                log_posterior: lp,
                alpha: state.alpha,
                accept_rate_pos: pos.rate(),
                accept_rate_alpha: alp.rate(),
            });
        }
    }

    if config.iterations > config.burn_in {
        let (rp, ra) = (pos_post.rate(), alp_post.rate());
        trace.post_burn_in_accept_pos = Some(rp);
        trace.post_burn_in_accept_alpha = Some(ra);
        for (name, rate) in [("position", rp), ("alpha", ra)] {
            if rate < ACCEPTANCE_BAND.0 || rate > ACCEPTANCE_BAND.1 {
                trace.warnings.push(format!(
                    "{name} acceptance rate {rate:.3} after burn-in is outside [{}, {}]",
                    ACCEPTANCE_BAND.0, ACCEPTANCE_BAND.1
                ));
            }
        }
    }
    Ok((state, trace))
}

fn propose(tag: crate::chart::VariantTag, at: &Point, u: &[f64]) -> Option<Point> {
    let v = WrappingVariant::new(tag, at.clone()).ok()?;
    let z = wrap_raw(&v, u).ok()?;
    Some(at.manifold().settle(z))
}
