use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geowrap::dist::{wn_log_pdf, DistributionSpec};
use geowrap::io::{read_samples, read_table};

const SPEC: &str = r#"{"manifold": {"kind": "hyperboloid", "dim": 2, "scale": 1.0},
"variant": "isometry_lambert", "location": [0.0, 0.0, 1.0], "sigma": [[0.04, 0.0], [0.0, 0.09]]}"#;

fn geowrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geowrap")).args(args).output().unwrap()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn florentine() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/florentine.csv")
}

#[test]
fn sample_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "wn.json");
    std::fs::write(&spec, SPEC).unwrap();
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    for out in [&a, &b] {
        let o = geowrap(&["sample", "--spec", s(&spec), "--n", "1000", "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let (_, points) = read_samples(&text, None).unwrap();
    assert_eq!(points.len(), 1000);
}

#[test]
fn logpdf_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let samples = path(dir.path(), "s.csv");
    let out = path(dir.path(), "lp.csv");
    assert!(geowrap(&["sample", "--spec", SPEC, "--n", "50", "--out", s(&samples)]).status.success());
    let o = geowrap(&["logpdf", "--spec", SPEC, "--points", s(&samples), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let params = DistributionSpec::from_json(SPEC).unwrap().to_params().unwrap();
    let (_, points) = read_samples(&std::fs::read_to_string(&samples).unwrap(), None).unwrap();
    let values = read_table(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(values.len(), 50);
    for (z, row) in points.iter().zip(&values) {
        assert_eq!(row[0], wn_log_pdf(&params, z).unwrap());
    }
}

#[test]
fn fitted_sigma_is_close_to_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    let samples = path(dir.path(), "s.csv");
    assert!(geowrap(&["sample", "--spec", SPEC, "--n", "10000", "--seed", "3", "--out", s(&samples)]).status.success());
    for cmd in ["fit-sigma", "fit-bayes"] {
        let out = path(dir.path(), "fit.json");
        let o = geowrap(&[cmd, "--samples", s(&samples), "--location", "0,0,1", "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let fit = DistributionSpec::from_json(&text).unwrap();
        fit.to_params().unwrap();
        let truth = [[0.04, 0.0], [0.0, 0.09]];
        let err: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (fit.sigma[i][j] - truth[i][j]).powi(2)).sum();
        assert!(err.sqrt() / 0.0985 < 0.05, "{cmd}: {:?}", fit.sigma);
    }
}

#[test]
fn mixture_fit_writes_a_normalised_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let samples = path(dir.path(), "s.csv");
    let out = path(dir.path(), "mix.json");
    assert!(geowrap(&["sample", "--spec", SPEC, "--n", "400", "--out", s(&samples)]).status.success());
    let o = geowrap(&["fit-mixture", "--samples", s(&samples), "--components", "2", "--max-iter", "20", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let w: f64 = v["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-12);
    assert_eq!(v["components"].as_array().unwrap().len(), 2);
}

#[test]
fn network_fit_is_reproducible_and_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let trace = path(dir.path(), &format!("t{threads}.csv"));
        let summary = path(dir.path(), &format!("s{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_geowrap"))
            .env("GEOWRAP_THREADS", threads)
            .args(["network-fit", "--edges", s(&florentine()), "--manifold", "sphere", "--iters", "2000"])
            .args(["--seed", "5", "--chains", "3", "--trace", s(&trace), "--summary", s(&summary)])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((std::fs::read_to_string(trace).unwrap(), std::fs::read_to_string(summary).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let (trace, summary) = &outputs[0];
    assert!(trace.starts_with("chain,iteration,log_posterior,alpha,accept_rate_pos,accept_rate_alpha\n"));
    // 2000 iterations, half burn-in, thinned by 10: 200 records per chain
    assert_eq!(trace.lines().count(), 1 + 3 * 200);
    let v: serde_json::Value = serde_json::from_str(summary).unwrap();
    assert_eq!(v["chains"], 3);
    assert!(v["alpha_mean"].as_f64().unwrap().is_finite());
}

#[test]
fn limits_deviation_shrinks_with_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "limits.csv");
    assert!(geowrap(&["limits", "--n", "5", "--out", s(&out)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 3 * 5 * 5);
    for group in rows.chunks(5) {
        let dev: Vec<f64> = group.iter().map(|r| r[6].parse().unwrap()).collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{group:?}");
    }
}

#[test]
fn usage_errors_exit_with_one_and_print_help() {
    for args in [&["frobnicate"][..], &["sample", "--bogus"], &["sample", "--spec", SPEC]] {
        let o = geowrap(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("Usage:") && err.contains("network-fit"), "{err}");
    }
    let o = geowrap(&["fit-sigma", "--samples", "x.csv", "--variant", "nope", "--out", "y.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(geowrap(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two_and_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.csv");
    std::fs::write(&bad, "x0,x1,x2\n1,2,oops\n").unwrap();
    let out = path(dir.path(), "lp.csv");
    let o = geowrap(&["logpdf", "--spec", SPEC, "--points", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let wrong_sheet = SPEC.replace("1.0]", "-1.0]");
    let o = geowrap(&["sample", "--spec", &wrong_sheet, "--n", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = geowrap(&["sample", "--spec", SPEC, "--n", "3", "--out", "/no/such/dir/s.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn verify_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "report.json");
    let o = geowrap(&["verify", "--out", s(&out)]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 14);
    assert_eq!(v["all_passed"], true);
}
