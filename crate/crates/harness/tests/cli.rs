use std::path::Path;
use std::process::{Command, Output};

use qdiv_core::fixtures;
use qdiv_harness::{CheckRecord, RunReport};
use serde_json::Value;

fn qdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiv"))
        .args(args)
        .output()
        .expect("spawn qdiv")
}

fn ok_json(args: &[&str]) -> Value {
    let out = qdiv(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_fixture(name: &str, dir: &Path) {
    let out = qdiv(&["fixture", name, "--dir", dir.to_str().unwrap()]);
    assert!(out.status.success());
}

fn p(dir: &Path, file: &str) -> String {
    dir.join(file).to_str().unwrap().to_string()
}

#[test]
fn divergences_match_fixture_references() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture("qubit_a", dir.path());
    let r = fixtures::qubit_a().reference;
    let (rho, sigma) = (p(dir.path(), "rho.json"), p(dir.path(), "sigma.json"));
    for (kind, expected) in [
        ("umegaki", r.umegaki),
        ("rld", r.rld_entropy),
        ("dmax", r.dmax),
        ("fidelity", r.fidelity_logdiv),
    ] {
        let v = ok_json(&["divergence", "--kind", kind, "--rho", &rho, "--sigma", &sigma]);
        let got = v["value"]["value"].as_f64().unwrap();
        assert!((got - expected).abs() < 1e-9, "{kind}: {got} vs {expected}");
    }
    let v = ok_json(&[
        "divergence",
        "--kind",
        "measured",
        "--rho",
        &rho,
        "--sigma",
        &sigma,
        "--budget",
        "100",
    ]);
    assert!(v["value"]["value"].as_f64().unwrap() <= r.umegaki + 1e-8);
}

#[test]
fn metrics_match_fixture_references() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture("qutrit", dir.path());
    let r = fixtures::qutrit().reference;
    let (rho, x) = (p(dir.path(), "rho.json"), p(dir.path(), "tangent.json"));
    for (spec, expected) in [
        ("sld", r.metric_sld),
        ("wy", r.metric_wy),
        ("bkm", r.metric_bkm),
        ("rld", r.metric_rld),
    ] {
        let v = ok_json(&["metric", "--spec", spec, "--rho", &rho, "--tangent", &x]);
        let got = v["value"].as_f64().unwrap();
        assert!(
            (got - expected).abs() < 1e-9 * (1.0 + expected),
            "{spec}: {got} vs {expected}"
        );
    }
    // alpha = 0 is the Wigner-Yanase metric
    let v = ok_json(&["metric", "--spec", "alpha=0", "--rho", &rho, "--tangent", &x]);
    assert!((v["value"].as_f64().unwrap() - r.metric_wy).abs() < 1e-9 * (1.0 + r.metric_wy));
    assert_eq!(
        qdiv(&["metric", "--spec", "nope", "--rho", &rho, "--tangent", &x])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn reverse_test_json_reproduces_rld_entropy() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture("qubit_b", dir.path());
    let out = p(dir.path(), "rt.json");
    let o = qdiv(&[
        "reverse-test",
        "--rho",
        &p(dir.path(), "rho.json"),
        "--sigma",
        &p(dir.path(), "sigma.json"),
        "--json",
        &out,
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let probs = |k: &str| -> Vec<f64> { v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
    let (pp, qq) = (probs("p"), probs("q"));
    let kl: f64 = pp.iter().zip(&qq).map(|(a, b)| a * (a / b).ln()).sum();
    assert!((kl - fixtures::qubit_b().reference.rld_entropy).abs() < 1e-8);
}

#[test]
fn asym_commands_emit_machine_readable_output() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture("qubit_a", dir.path());
    let (rho, sigma) = (p(dir.path(), "rho.json"), p(dir.path(), "sigma.json"));
    let csv = p(dir.path(), "t.csv");
    let o = qdiv(&[
        "asym",
        "threshold",
        "--n",
        "3",
        "--n-min",
        "1",
        "--rho",
        &rho,
        "--sigma",
        &sigma,
        "--points",
        "3",
        "--csv",
        &csv,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["n", "a", "type1_accept", "type2", "threshold"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let type2: f64 = row[3].parse().unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&type2));
    }

    let v = ok_json(&[
        "asym",
        "reverse-test",
        "--n",
        "2",
        "--rho",
        &rho,
        "--sigma",
        &sigma,
        "--rate",
        "1.5",
    ]);
    assert_eq!(v["p"].as_array().unwrap().len(), v["q"].as_array().unwrap().len());

    let v = ok_json(&[
        "asym",
        "convert",
        "--n",
        "3",
        "--n-min",
        "2",
        "--rho0",
        &p(dir.path(), "rho0.json"),
        "--sigma0",
        &p(dir.path(), "sigma0.json"),
        "--rho",
        &rho,
        "--sigma",
        &sigma,
    ]);
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn verify_exit_codes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "cfg.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 4, "trials": 2, "dims": [2, 3], "suites": ["sandwich", "monotonicity"]}"#,
    )
    .unwrap();
    let report = p(dir.path(), "rep.json");
    let o = qdiv(&["verify", "--config", &cfg, "--report", &report]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: RunReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(rep.all_pass() && rep.summary.total > 0);

    assert_eq!(
        qdiv(&["verify", "--config", &cfg, "--suite", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qdiv(&["verify", "--config", &p(dir.path(), "missing.json")])
            .status
            .code(),
        Some(2)
    );

    let bad = p(dir.path(), "bad.json");
    std::fs::write(
        &bad,
        r#"{"seed": 4, "trials": 1, "dims": [2], "tolerances": {"monotonicity": -1e6}}"#,
    )
    .unwrap();
    let o = qdiv(&[
        "verify",
        "--config",
        &bad,
        "--suite",
        "monotonicity",
        "--report",
        &report,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let rep: RunReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let failed: Vec<&CheckRecord> = rep.failures().collect();
    assert!(!failed.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains(&format!("seed={}", failed[0].seed)));

    // replaying the failed trial from the printed seed gives the same records
    let f = failed[0];
    let replayed = p(dir.path(), "replay.json");
    let seed = f.seed.to_string();
    let d = f.dim.to_string();
    let t = f.trial.to_string();
    let o = qdiv(&[
        "verify",
        "--config",
        &bad,
        "--suite",
        "monotonicity",
        "--replay",
        &seed,
        "--dim",
        &d,
        "--trial",
        &t,
        "--report",
        &replayed,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let again: Vec<CheckRecord> = serde_json::from_str(&std::fs::read_to_string(&replayed).unwrap()).unwrap();
    let trial: Vec<&CheckRecord> = rep.suites[0].records.iter().filter(|r| r.seed == f.seed).collect();
    assert_eq!(again.iter().collect::<Vec<_>>(), trial);
}

#[test]
fn dimension_cap_is_read_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "cfg.json");
    std::fs::write(&cfg, r#"{"seed": 1, "trials": 1, "dims": [2], "suites": ["sandwich"]}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qdiv"))
        .args(["verify", "--config", &cfg])
        .env("QDIV_DIM_CAP", "16")
        .output()
        .unwrap();
    // the default n_range reaches 2^8 > 16
    assert_eq!(o.status.code(), Some(2));
}
