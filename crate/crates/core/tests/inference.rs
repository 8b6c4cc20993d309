use geowrap::chart::{wrap, VariantTag, WrappingVariant};
use geowrap::dist::{mixture_sample, wn_log_pdf, wn_sample, CovarianceSpec, MixtureParams, WrappedNormalParams};
use geowrap::inference::{em_fit, iw_log_density, iw_posterior, mle_sigma, IWParams};
use geowrap::manifold::{geodesic_distance, ManifoldId, Point};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

fn lambert_at(p: Point) -> WrappingVariant {
    WrappingVariant::new(VariantTag::IsometryLambert, p).unwrap()
}

#[test]
fn mle_consistency_on_hyperboloid() {
    let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
    let truth = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.04, 0.09]));
    let v = WrappingVariant::at_base(VariantTag::IsometryLambert, h2).unwrap();
    let params = WrappedNormalParams::new(v.clone(), CovarianceSpec::new(truth.clone()).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ys = wn_sample(&params, &mut rng, 10_000).unwrap();
    let est = mle_sigma(&ys, &v).unwrap();
    let rel = (&est.matrix - &truth).norm() / truth.norm();
    assert!(rel < 0.05, "relative error {rel}");
    assert!(!est.singular);
}

#[test]
fn mle_is_exactly_relocation_equivariant() {
    let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
    let here = lambert_at(h2.base_point());
    let there = lambert_at(Point::new(h2, vec![1.0, -0.5, (2.25f64).sqrt()]).unwrap());
    let us = [[0.1, 0.2], [-0.3, 0.05], [0.4, -0.1], [0.0, 0.25]];
    let a: Vec<Point> = us.iter().map(|u| wrap(&here, u).unwrap()).collect();
    let b: Vec<Point> = us.iter().map(|u| wrap(&there, u).unwrap()).collect();
    let sa = mle_sigma(&a, &here).unwrap().matrix;
    let sb = mle_sigma(&b, &there).unwrap().matrix;
    assert!((sa - sb).amax() < 1e-12);
}

#[test]
fn posterior_updates_compose() {
    let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
    let v = WrappingVariant::at_base(VariantTag::IsometryLambert, h2).unwrap();
    let params = WrappedNormalParams::new(v.clone(), CovarianceSpec::isotropic(2, 0.2).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ys = wn_sample(&params, &mut rng, 60).unwrap();
    let prior = IWParams::new(3.0, DMatrix::identity(2, 2) * 0.5).unwrap();
    let (a, b) = ys.split_at(25);
    let seq = iw_posterior(&iw_posterior(&prior, a, &v).unwrap(), b, &v).unwrap();
    let joint = iw_posterior(&prior, &ys, &v).unwrap();
    assert_eq!(seq.nu(), joint.nu());
    assert!((seq.phi() - joint.phi()).amax() <= 1e-12 * joint.phi().amax());
}

// inverse-gamma(ν/2, φ/2) prior written out directly
fn inv_gamma_log_pdf(nu: f64, phi: f64, x: f64) -> f64 {
    let (a, b) = (nu / 2.0, phi / 2.0);
    a * b.ln() - ln_gamma(a) - (a + 1.0) * x.ln() - b / x
}

#[test]
fn one_dimensional_posterior_matches_grid() {
    let h1 = ManifoldId::hyperboloid(1, 1.0).unwrap();
    let v = WrappingVariant::at_base(VariantTag::ExpParallelTransport, h1).unwrap();
    let truth = WrappedNormalParams::new(v.clone(), CovarianceSpec::isotropic(1, 0.3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let ys = wn_sample(&truth, &mut rng, 40).unwrap();
    let (nu, phi) = (3.0, 0.5);
    let prior = IWParams::new(nu, DMatrix::from_element(1, 1, phi)).unwrap();
    let post = iw_posterior(&prior, &ys, &v).unwrap();

    let n = 10_000;
    let grid: Vec<f64> = (1..=n).map(|i| 3.0 * i as f64 / n as f64).collect();
    let brute: Vec<f64> = grid
        .iter()
        .map(|&s2| {
            let p = WrappedNormalParams::new(v.clone(), CovarianceSpec::isotropic(1, s2).unwrap()).unwrap();
            ys.iter().map(|y| wn_log_pdf(&p, y).unwrap()).sum::<f64>() + inv_gamma_log_pdf(nu, phi, s2)
        })
        .collect();
    let analytic: Vec<f64> =
        grid.iter().map(|&s2| iw_log_density(&post, &CovarianceSpec::isotropic(1, s2).unwrap()).unwrap()).collect();
    let normalise = |lw: &[f64]| {
        let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|x| (x - top).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let (p, q) = (normalise(&brute), normalise(&analytic));
    let tv = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
    assert!(tv < 1e-3, "tv {tv}");
}

#[test]
fn em_recovers_two_clusters() {
    let h2 = ManifoldId::hyperboloid(2, 1.0).unwrap();
    let c1 = wrap(&WrappingVariant::at_base(VariantTag::ExpParallelTransport, h2).unwrap(), &[2.0, 0.0]).unwrap();
    let c2 = wrap(&WrappingVariant::at_base(VariantTag::ExpParallelTransport, h2).unwrap(), &[-2.0, 0.0]).unwrap();
    assert!((geodesic_distance(&c1, &c2).unwrap() - 4.0).abs() < 1e-9);
    let sigma = CovarianceSpec::isotropic(2, 0.05).unwrap();
    let comps = vec![
        WrappedNormalParams::new(lambert_at(c1.clone()), sigma.clone()).unwrap(),
        WrappedNormalParams::new(lambert_at(c2.clone()), sigma).unwrap(),
    ];
    let truth = MixtureParams::new(vec![0.5, 0.5], comps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ys = mixture_sample(&truth, &mut rng, 2000).unwrap();
    let fit = em_fit(&ys, 2, VariantTag::IsometryLambert, &mut rng).unwrap();
    for w in fit.trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "log-likelihood dropped: {w:?}");
    }
    let locs: Vec<&Point> = fit.mixture.components().iter().map(|c| c.variant().location()).collect();
    let (a, b) = if geodesic_distance(locs[0], &c1).unwrap() < geodesic_distance(locs[1], &c1).unwrap() {
        (0, 1)
    } else {
        (1, 0)
    };
    assert!(geodesic_distance(locs[a], &c1).unwrap() < 0.1);
    assert!(geodesic_distance(locs[b], &c2).unwrap() < 0.1);
    for w in fit.mixture.weights() {
        assert!((w - 0.5).abs() < 0.05, "weight {w}");
    }
}
