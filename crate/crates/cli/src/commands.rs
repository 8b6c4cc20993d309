use std::path::Path;

use geowrap::chart::{wrap, VariantTag, WrappingVariant};
use geowrap::dist::{wn_log_pdf, wn_sample, CovarianceSpec, DistributionSpec, ManifoldSpec};
use geowrap::inference::{em_fit_with, estimate_location, iw_posterior, mle_sigma, EmConfig, IWParams, SigmaPolicy};
use geowrap::io::{format_f64, read_samples, write_samples, write_table, write_trace};
use geowrap::lsnm::{mh_run, summarize, Graph, MhConfig, PosteriorSummary, Trace};
use geowrap::manifold::{Kind, ManifoldId, Point};
use geowrap::testkit::suite;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{FitArgs, NetworkArgs};
use crate::output::{check_writable, read_input, write_atomic};
use crate::CliError;

fn load_spec(arg: &str) -> Result<DistributionSpec, CliError> {
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { read_input(Path::new(arg))? };
    Ok(DistributionSpec::from_json(&text)?)
}

fn parse_variant(s: &str) -> Result<VariantTag, CliError> {
    s.parse().map_err(|e: geowrap::Error| CliError::Usage(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Number of worker threads: the machine's parallelism, capped by `GEOWRAP_THREADS`.
pub fn thread_cap() -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("GEOWRAP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n.min(available)),
            _ => Err(CliError::Usage(format!("GEOWRAP_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(available),
    }
}

pub fn sample(spec: &str, n: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    check_writable(out)?;
    let params = load_spec(spec)?.to_params()?;
    let points = wn_sample(&params, &mut ChaCha8Rng::seed_from_u64(seed), n)?;
    write_atomic(out, &write_samples(params.variant().manifold(), &points))
}

pub fn logpdf(spec: &str, points: &Path, out: &Path) -> Result<(), CliError> {
    check_writable(out)?;
    let params = load_spec(spec)?.to_params()?;
    let (_, zs) = read_samples(&read_input(points)?, Some(params.variant().manifold()))?;
    let values = zs.iter().map(|z| wn_log_pdf(&params, z).map(|lp| vec![lp])).collect::<Result<Vec<_>, _>>()?;
    write_atomic(out, &write_table(&["log_pdf".to_string()], &values))
}

struct Fitted {
    manifold: ManifoldId,
    variant: WrappingVariant,
    samples: Vec<Point>,
    location_estimated: bool,
}

fn prepare_fit(fit: &FitArgs) -> Result<Fitted, CliError> {
    check_writable(&fit.out)?;
    let tag = parse_variant(&fit.variant)?;
    let (manifold, samples) = read_samples(&read_input(&fit.samples)?, None)?;
    if samples.is_empty() {
        return Err(CliError::Data("sample file has no rows".into()));
    }
    let (location, location_estimated) = match &fit.location {
        Some(coords) => (Point::new(manifold, coords.clone())?, false),
        None => (estimate_location(&samples, tag, &SigmaPolicy::Profile)?, true),
    };
    Ok(Fitted { manifold, variant: WrappingVariant::new(tag, location)?, samples, location_estimated })
}

fn spec_with_sigma(f: &Fitted, sigma: &DMatrix<f64>) -> DistributionSpec {
    DistributionSpec {
        manifold: f.manifold.into(),
        variant: f.variant.tag(),
        location: f.variant.location().to_vec(),
        sigma: rows(sigma),
        truncation_radius: None,
    }
}

#[derive(Serialize)]
struct SigmaFitOutput {
    #[serde(flatten)]
    spec: DistributionSpec,
    diagnostics: SigmaDiagnostics,
}

#[derive(Serialize)]
struct SigmaDiagnostics {
    samples: usize,
    singular: bool,
    location_estimated: bool,
}

pub fn fit_sigma(fit: &FitArgs) -> Result<(), CliError> {
    let f = prepare_fit(fit)?;
    let est = mle_sigma(&f.samples, &f.variant)?;
    let out = SigmaFitOutput {
        spec: spec_with_sigma(&f, &est.matrix),
        diagnostics: SigmaDiagnostics {
            samples: est.samples,
            singular: est.singular,
            location_estimated: f.location_estimated,
        },
    };
    write_atomic(&fit.out, &to_json(&out))
}

#[derive(Serialize)]
struct IwJson {
    nu: f64,
    phi: Vec<Vec<f64>>,
}

impl From<&IWParams> for IwJson {
    fn from(p: &IWParams) -> Self {
        Self { nu: p.nu(), phi: rows(p.phi()) }
    }
}

#[derive(Serialize)]
struct BayesFitOutput {
    /// `sigma` is the posterior mean, or the mode when the mean does not exist.
    #[serde(flatten)]
    spec: DistributionSpec,
    sigma_estimate: &'static str,
    prior: IwJson,
    posterior: IwJson,
    diagnostics: SigmaDiagnostics,
}

pub fn fit_bayes(fit: &FitArgs, prior_nu: Option<f64>, prior_scale: f64) -> Result<(), CliError> {
    let f = prepare_fit(fit)?;
    let k = f.manifold.dim;
    let prior = IWParams::new(prior_nu.unwrap_or(k as f64 + 2.0), DMatrix::identity(k, k) * prior_scale)?;
    let post = iw_posterior(&prior, &f.samples, &f.variant)?;
    let kf = k as f64;
    let (sigma, which) = if post.nu() > kf + 1.0 {
        (post.phi() / (post.nu() - kf - 1.0), "posterior_mean")
    } else {
        (post.phi() / (post.nu() + kf + 1.0), "posterior_mode")
    };
    let out = BayesFitOutput {
        spec: spec_with_sigma(&f, &sigma),
        sigma_estimate: which,
        prior: (&prior).into(),
        posterior: (&post).into(),
        diagnostics: SigmaDiagnostics {
            samples: f.samples.len(),
            singular: CovarianceSpec::new(sigma).is_err(),
            location_estimated: f.location_estimated,
        },
    };
    write_atomic(&fit.out, &to_json(&out))
}

#[derive(Serialize)]
struct MixtureOutput {
    weights: Vec<f64>,
    components: Vec<DistributionSpec>,
    diagnostics: MixtureDiagnostics,
}

#[derive(Serialize)]
struct MixtureDiagnostics {
    samples: usize,
    log_likelihood: f64,
    iterations: usize,
    reseeds: usize,
    converged: bool,
}

pub fn fit_mixture(
    samples: &Path,
    variant: &str,
    components: usize,
    max_iter: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    check_writable(out)?;
    let tag = parse_variant(variant)?;
    let (_, points) = read_samples(&read_input(samples)?, None)?;
    let config = EmConfig { max_iter, ..EmConfig::default() };
    let fit = em_fit_with(&points, components, tag, &config, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let result = MixtureOutput {
        weights: fit.mixture.weights().to_vec(),
        components: fit.mixture.components().iter().map(DistributionSpec::from_params).collect(),
        diagnostics: MixtureDiagnostics {
            samples: points.len(),
            log_likelihood: fit.log_likelihood,
            iterations: fit.iterations,
            reseeds: fit.reseeds,
            converged: fit.converged,
        },
    };
    write_atomic(out, &to_json(&result))
}

#[derive(Serialize)]
struct NetworkOutput {
    #[serde(flatten)]
    summary: PosteriorSummary,
    manifold: ManifoldSpec,
    seed: u64,
    config: MhConfig,
}

fn parse_kind(s: &str) -> Result<Kind, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Usage(format!("unknown manifold `{s}` (expected hyperboloid, sphere or euclidean)")))
}

pub fn network_fit(a: &NetworkArgs) -> Result<(), CliError> {
    check_writable(&a.trace)?;
    check_writable(&a.summary)?;
    if a.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    let manifold = ManifoldId::new(parse_kind(&a.manifold)?, a.dim, a.scale)?;
    let mut config = match &a.config {
        Some(path) => serde_json::from_str(&read_input(path)?)
            .map_err(|e| CliError::Data(format!("sampler config {}: {e}", path.display())))?,
        None => MhConfig::default(),
    };
    if let Some(iters) = a.iters {
        config.iterations = iters;
        if a.burn_in.is_none() && config.burn_in >= iters {
            config.burn_in = iters / 2;
        }
    }
    if let Some(b) = a.burn_in {
        config.burn_in = b;
    }
    if let Some(t) = a.thin {
        config.thin = t;
    }
    config.validate()?;
    let graph = Graph::parse_edge_list(&read_input(&a.edges)?)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?.min(a.chains))
        .build()
        .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    let traces: Vec<Trace> = pool.install(|| {
        (0..a.chains)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(a.seed.wrapping_add(c as u64));
                mh_run(&graph, manifold, &config, &mut rng).map(|(_, t)| t)
            })
            .collect::<Result<_, _>>()
    })?;
    for (c, t) in traces.iter().enumerate() {
        for w in &t.warnings {
            eprintln!("chain {c}: {w}");
        }
    }

    let mut csv = String::from("chain,");
    for (c, t) in traces.iter().enumerate() {
        let body = write_trace(t);
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        if c == 0 {
            csv.push_str(header);
            csv.push('\n');
        }
        for line in lines {
            csv.push_str(&format!("{c},{line}\n"));
        }
    }
    let out = NetworkOutput { summary: summarize(&traces)?, manifold: manifold.into(), seed: a.seed, config };
    write_atomic(&a.trace, &csv)?;
    write_atomic(&a.summary, &to_json(&out))
}

pub fn verify(out: &Path) -> Result<(), CliError> {
    check_writable(out)?;
    let report = suite::run_all(thread_cap()?);
    for c in &report.checks {
        println!("{}", c.line());
    }
    println!("{} passed, {} failed", report.passed, report.failed);
    write_atomic(out, &to_json(&report))?;
    if report.all_passed {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

pub const LIMIT_SCALES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// For each manifold kind and variant, `n` random tangent vectors with
/// 0.1 ≤ |u| < 1 are wrapped at the base point for growing radii.
pub fn limits(n: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    check_writable(out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("kind,variant,sample,scale,u0,u1,deviation\n");
    for (kind, kind_name) in [(Kind::Hyperboloid, "hyperboloid"), (Kind::Sphere, "sphere")] {
        for tag in VariantTag::ALL {
            let tag_name = serde_json::to_value(tag).expect("tag serialises");
            let tag_name = tag_name.as_str().unwrap_or_default().to_string();
            for i in 0..n {
                let r = rng.random_range(0.1..1.0);
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                let u = [r * f64::cos(t), r * f64::sin(t)];
                for scale in LIMIT_SCALES {
                    let m = ManifoldId::new(kind, 2, scale)?;
                    let z = wrap(&WrappingVariant::at_base(tag, m)?, &u)?;
                    let dev = (z.coords()[0] - u[0]).hypot(z.coords()[1] - u[1]);
                    csv.push_str(&format!(
                        "{kind_name},{tag_name},{i},{},{},{},{}\n",
                        format_f64(scale),
                        format_f64(u[0]),
                        format_f64(u[1]),
                        format_f64(dev)
                    ));
                }
            }
        }
    }
    write_atomic(out, &csv)
}
