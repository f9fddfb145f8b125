use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adam-dynamics")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["simulate", "--bogus"])), 1);
    assert_eq!(code(&run(&["simulate", "--alpha", "0.1", "--beta1", "0.9", "--beta2", "0.999", "--epsilon", "1e-8"])), 1);
    assert_eq!(code(&run(&["sweep", "--preset", "7"])), 1);
    let both = run(&["simulate", "--preset", "2", "--c", "1", "--matrix", "m.json"]);
    assert_eq!(code(&both), 1);
}

#[test]
fn origin_stays_put_without_epsilon() {
    let out = run(&[
        "simulate", "--alpha", "0.5", "--beta1", "0.2", "--beta2", "0.5", "--epsilon", "0", "--c", "1", "--x0", "0,0,0",
        "--steps", "10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,m_1,v_1,w_1"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    for (t, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("{t},0.0,0.0,0.0"));
    }
}

#[test]
fn preset_two_alternates_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = run(&["simulate", "--preset", "2", "--steps", "20000", "--out", path_str(&csv)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let tail: Vec<f64> =
        text.lines().rev().take(50).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(tail.iter().all(|w| (w.abs() - 0.16666).abs() < 1e-3));
    assert!(tail.windows(2).all(|p| p[0] * p[1] < 0.0));

    let manifest = dir.path().join("traj.csv.manifest.json");
    let m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["output_files"][0], path_str(&csv));
    assert_eq!(code(&run(&["replay", path_str(&manifest), "--check"])), 0);

    let elsewhere = dir.path().join("again");
    fs::create_dir(&elsewhere).unwrap();
    assert_eq!(code(&run(&["replay", path_str(&manifest), "--out-dir", path_str(&elsewhere)])), 0);
    assert_eq!(fs::read(elsewhere.join("traj.csv")).unwrap(), fs::read(&csv).unwrap());

    fs::write(&csv, text.replacen("0.0", "0.5", 1)).unwrap();
    assert_eq!(code(&run(&["replay", path_str(&manifest), "--check"])), 4);
}

#[test]
fn divergence_exits_two_and_keeps_the_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("blowup.csv");
    let out = run(&[
        "simulate", "--alpha", "1e13", "--beta1", "0.9", "--beta2", "0.999", "--epsilon", "1e-8", "--c", "1", "--x0",
        "0,0,1", "--steps", "10", "--out", path_str(&csv),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverge"));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("t,m_1,v_1,w_1\n0,"));
}

#[test]
fn experiment_two_cycle_report() {
    let out = run(&["cycle", "--alpha", "0.5", "--beta1", "0.2", "--beta2", "0.5", "--c", "1"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    for key in ["x1", "x2", "residual", "eigenvalues", "spectral_radius", "classification", "det_dF", "c_exception"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["classification"], "attractive");
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
    let eigs = r["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 3);
    assert!(eigs.iter().any(|e| (e[0].as_f64().unwrap() - 0.0113981).abs() < 1e-6));
    assert!((r["x1"]["w"][0].as_f64().unwrap().abs() - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn continued_cycle_matches_reference_eigenvalues() {
    let out = run(&["cycle", "--alpha", "0.5", "--beta1", "0.2", "--beta2", "0.5", "--c", "1", "--epsilon", "1e-6"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let expected = [(0.0113983, 0.0), (-0.7606667, 0.5465392), (-0.7606667, -0.5465392)];
    for e in r["eigenvalues"].as_array().unwrap() {
        let (re, im) = (e[0].as_f64().unwrap(), e[1].as_f64().unwrap());
        assert!(expected.iter().any(|(a, b)| (re - a).abs() < 1e-5 && (im - b).abs() < 1e-5), "{re} {im}");
    }
    assert_eq!(r["continuation"].as_array().unwrap().len(), 10);
}

#[test]
fn experiment_one_cycle_is_repelling() {
    let out = run(&["cycle", "--alpha", "0.001", "--beta1", "0.9", "--beta2", "0.999", "--c", "10"]);
    assert_eq!(json(&out)["classification"], "repelling");
}

#[test]
fn exceptional_coefficient_is_flagged() {
    // For alpha = 0.5, beta1 = 0.2, beta2 = 0.5 the exceptional coefficient is 565/39.
    let out = run(&["cycle", "--alpha", "0.5", "--beta1", "0.2", "--beta2", "0.5", "--c", "14.487179487179487"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let warnings = r["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w == "continuation_not_guaranteed"));
}

#[test]
fn newton_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let seed = dir.path().join("seed.json");
    fs::write(&seed, r#"{"m": [0.0], "v": [0.0], "w": [0.0]}"#).unwrap();
    let out = run(&[
        "cycle", "--alpha", "0.5", "--beta1", "0.2", "--beta2", "0.5", "--c", "1", "--epsilon", "1e-6", "--newton-seed",
        path_str(&seed),
    ]);
    assert_eq!(code(&out), 3);
    assert!(json(&out).get("residual").is_some());
}

#[test]
fn sweep_below_threshold_is_all_period_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--alpha-min", "1e-4", "--alpha-max", "2e-4", "--points", "6", "--beta1", "0.9", "--beta2", "0.999",
        "--epsilon", "1e-6", "--c", "10", "--transient", "5000", "--samples", "128", "--out", path_str(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,w_sample,period_label"));
    let body: Vec<&str> = lines.collect();
    let (footer, rows) = body.split_last().unwrap();
    assert_eq!(*footer, "# predicted_bifurcation=0.0038");
    assert_eq!(rows.len(), 6 * 128);
    assert!(rows.iter().all(|r| r.ends_with(",1")));

    let manifest = dir.path().join("sweep.csv.manifest.json");
    assert!(manifest.exists());
    assert_eq!(code(&run(&["replay", path_str(&manifest), "--check"])), 0);
}

#[test]
fn verify_reports_each_property() {
    let out = run(&["verify", "--suite", "closed-form"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("# suite=closed-form"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("PASS ")));
    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 1);
}
