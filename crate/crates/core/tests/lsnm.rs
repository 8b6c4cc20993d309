use geowrap::chart::{wrap, VariantTag, WrappingVariant};
use geowrap::dist::{wn_log_pdf, wn_sample, CovarianceSpec, WrappedNormalParams};
use geowrap::lsnm::{mh_run, mh_run_from, summarize, Graph, MhConfig, NetworkState, Priors};
use geowrap::manifold::{geodesic_distance, ManifoldId, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// 15 positions drawn from the sphere prior and edges drawn from the
/// logistic model with the given α.
fn synthetic_graph(alpha: f64, seed: u64) -> (Graph, Vec<Point>) {
    let s2 = ManifoldId::sphere(2, 1.0).unwrap();
    let prior = Priors::default_for(s2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = wn_sample(&prior.position, &mut rng, 15).unwrap();
    let mut edges = Vec::new();
    for i in 0..15 {
        for j in i + 1..15 {
            let d = geodesic_distance(&z[i], &z[j]).unwrap();
            if rng.random::<f64>() < logistic(alpha - d) {
                edges.push((i, j));
            }
        }
    }
    (Graph::new(15, &edges).unwrap(), z)
}

#[test]
fn synthetic_alpha_is_recovered() {
    let (g, _) = synthetic_graph(-0.6, 2024);
    let s2 = ManifoldId::sphere(2, 1.0).unwrap();
    let cfg = MhConfig { iterations: 100_000, burn_in: 50_000, thin: 10, ..MhConfig::default() };
    let (_, trace) = mh_run(&g, s2, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let s = summarize(&[trace]).unwrap();
    eprintln!("{s:?} edges {}", g.edges().len());
    assert!((s.alpha_mean + 0.6).abs() <= 0.3, "alpha mean {}", s.alpha_mean);
    assert!(s.geweke_z.unwrap().abs() < 3.0);
}

#[test]
fn florentine_alpha_in_target_band() {
    let g = Graph::parse_edge_list(include_str!("../data/florentine.csv")).unwrap();
    let s2 = ManifoldId::sphere(2, 1.0).unwrap();
    let cfg = MhConfig { iterations: 100_000, ..MhConfig::default() };
    let (_, trace) = mh_run(&g, s2, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let s = summarize(&[trace]).unwrap();
    eprintln!("{s:?}");
    assert!((-1.0..=-0.2).contains(&s.alpha_mean), "alpha mean {}", s.alpha_mean);
}

#[test]
fn position_proposal_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in [ManifoldId::hyperboloid(2, 1.0).unwrap(), ManifoldId::sphere(2, 1.0).unwrap()] {
        let sigma = CovarianceSpec::isotropic(2, 0.01).unwrap();
        let base = WrappingVariant::at_base(VariantTag::IsometryLambert, m).unwrap();
        for _ in 0..50 {
            let u = [rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)];
            let z = wrap(&base, &u).unwrap();
            let at_z = WrappedNormalParams::new(base.relocated(z.clone()).unwrap(), sigma.clone()).unwrap();
            let z2 = wn_sample(&at_z, &mut rng, 1).unwrap().pop().unwrap();
            let at_z2 = WrappedNormalParams::new(base.relocated(z2.clone()).unwrap(), sigma.clone()).unwrap();
            let forward = wn_log_pdf(&at_z, &z2).unwrap();
            let reverse = wn_log_pdf(&at_z2, &z).unwrap();
            assert!((forward - reverse).abs() < 1e-9, "{forward} vs {reverse}");
        }
    }
}

fn logistic_ln(edge: bool, eta: f64) -> f64 {
    let p = logistic(eta);
    if edge {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

/// Three nodes, one edge. The marginal posterior of α is computed on a
/// 200-point grid by averaging the likelihood over prior draws of the
/// positions, and compared with the chain's histogram of α.
#[test]
fn kernel_leaves_posterior_invariant() {
    let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
    let g = Graph::new(3, &[(0, 1)]).unwrap();
    let priors = Priors::default_for(h2).unwrap();

    let (lo, hi, bins) = (-14.0, 8.0, 200usize);
    let width = (hi - lo) / bins as f64;
    let grid: Vec<f64> = (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 200_000;
    let mut avg = vec![0.0; bins];
    let z = wn_sample(&priors.position, &mut rng, 3 * draws).unwrap();
    for s in 0..draws {
        let d01 = geodesic_distance(&z[3 * s], &z[3 * s + 1]).unwrap();
        let d02 = geodesic_distance(&z[3 * s], &z[3 * s + 2]).unwrap();
        let d12 = geodesic_distance(&z[3 * s + 1], &z[3 * s + 2]).unwrap();
        for (b, &a) in grid.iter().enumerate() {
            avg[b] += (logistic_ln(true, a - d01) + logistic_ln(false, a - d02) + logistic_ln(false, a - d12)).exp();
        }
    }
    let mut target: Vec<f64> = grid.iter().zip(&avg).map(|(&a, &l)| l * (-0.5 * a * a / 100.0).exp()).collect();
    let total: f64 = target.iter().sum();
    target.iter_mut().for_each(|t| *t /= total);

    let start = NetworkState::new(vec![h2.base_point(); 3], 0.0, 0.8, 1.5).unwrap();
    let cfg = MhConfig { iterations: 1_000_000, burn_in: 1000, thin: 1, ..MhConfig::default() };
    let (_, trace) = mh_run_from(&g, start, &priors, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let mut hist = vec![0.0; bins];
    let mut outside = 0.0;
    let kept: Vec<f64> = trace.post_burn_in().map(|r| r.alpha).collect();
    let w = 1.0 / kept.len() as f64;
    for a in kept {
        let b = ((a - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            hist[b as usize] += w;
        } else {
            outside += w;
        }
    }
    let tv = 0.5 * (hist.iter().zip(&target).map(|(h, t)| (h - t).abs()).sum::<f64>() + outside);
    eprintln!("tv {tv} outside {outside} accept {:?} {:?}", trace.post_burn_in_accept_pos, trace.post_burn_in_accept_alpha);
    assert!(tv < 0.03, "tv {tv}");
}
