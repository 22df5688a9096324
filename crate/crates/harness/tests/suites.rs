use std::collections::BTreeMap;

use qdiv_harness::report::Relation;
use qdiv_harness::{replay, run, CheckRecord, RunReport, Suite, SuiteConfig};

fn random_suites() -> Vec<Suite> {
    Suite::ALL.into_iter().filter(|s| !s.is_fixture_suite()).collect()
}

#[test]
fn minimal_config_passes_every_suite() {
    let rep = run(&SuiteConfig::minimal(7)).unwrap();
    for r in rep.failures() {
        eprintln!("{r:?}");
    }
    assert!(rep.summary.total >= 9);
    assert!(rep.all_pass());
    assert_eq!(rep.suites.len(), Suite::ALL.len());
    for s in &rep.suites {
        assert!(s.summary.total > 0, "{} emitted no checks", s.suite);
    }
}

#[test]
fn same_seed_gives_identical_reports() {
    let mut cfg = SuiteConfig::minimal(11);
    cfg.trials = 3;
    cfg.dims = vec![3, 2];
    cfg.suites = random_suites();
    let first = run(&cfg).unwrap().without_timing();
    let second = run(&cfg).unwrap().without_timing();
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap()
    );

    cfg.seed = 12;
    let other = run(&cfg).unwrap().without_timing();
    assert_ne!(
        serde_json::to_string(&other.suites).unwrap(),
        serde_json::to_string(&first.suites).unwrap()
    );

    let mut fx = SuiteConfig::minimal(11);
    fx.n_range = [1, 3];
    fx.suites = vec![Suite::SteinTrend, Suite::Conversion];
    let a = run(&fx).unwrap().without_timing();
    let b = run(&fx).unwrap().without_timing();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn reports_round_trip_through_json() {
    let mut cfg = SuiteConfig::minimal(3);
    cfg.trials = 2;
    cfg.suites = random_suites();
    cfg.tolerances.insert("integral".into(), serde_json::json!(1e-7));
    let rep = run(&cfg).unwrap();
    let text = serde_json::to_string_pretty(&rep).unwrap();
    let back: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
    for r in rep.suites.iter().flat_map(|s| &s.records) {
        let v = serde_json::to_value(r).unwrap();
        for key in [
            "suite",
            "check",
            "trial",
            "dim",
            "seed",
            "inputs_digest",
            "measured",
            "bound",
            "margin",
            "pass",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: CheckRecord = serde_json::from_value(v).unwrap();
        assert_eq!(&back, r);
    }
}

#[test]
fn failures_replay_exactly() {
    let mut cfg = SuiteConfig::minimal(5);
    cfg.trials = 2;
    cfg.dims = vec![2, 3];
    cfg.suites = vec![Suite::Monotonicity, Suite::MetricOrdering];
    let mut tol = BTreeMap::new();
    // a large negative slack demands an impossible decrease
    tol.insert("monotonicity".to_string(), serde_json::json!(-1e6));
    tol.insert("metric_ordering".to_string(), serde_json::json!(-1e3));
    cfg.tolerances = tol;
    let rep = run(&cfg).unwrap();
    assert_eq!(rep.summary.passed, 0);

    let failed: Vec<&CheckRecord> = rep.failures().collect();
    assert!(!failed.is_empty());
    for f in failed {
        assert_eq!(f.inputs_digest.len(), 64);
        let again = replay(&cfg, f).unwrap();
        let same = again.iter().find(|r| r.check == f.check).expect("check reappears");
        assert_eq!(same, f);
    }
}

#[test]
fn relations_are_reported_with_margins() {
    let mut cfg = SuiteConfig::minimal(9);
    cfg.suites = vec![Suite::Sandwich];
    let rep = run(&cfg).unwrap();
    for r in &rep.suites[0].records {
        let m = match r.relation {
            Relation::Le | Relation::Lt => r.bound - r.measured,
            Relation::Ge | Relation::Gt => r.measured - r.bound,
        };
        assert_eq!(m, r.margin);
        assert!(r.pass && r.margin >= 0.0);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(SuiteConfig::from_json(r#"{"seed": 1, "trials": 0, "dims": [2]}"#).is_err());
    assert!(SuiteConfig::from_json(r#"{"seed": 1, "trials": 1, "dims": [9]}"#).is_err());
    assert!(SuiteConfig::from_json(r#"{"seed": 1, "trials": 1, "dims": [2], "suites": ["nope"]}"#).is_err());
    assert!(SuiteConfig::from_json(r#"{"seed": 1, "trials": 1, "dims": [2], "tolerances": {"nope": 1}}"#).is_err());
    assert!(SuiteConfig::from_json(r#"{"seed": 1, "trials": 1, "dims": [2], "n_range": [2, 30]}"#).is_err());
    let ok = SuiteConfig::from_json(r#"{"seed": 1, "trials": 2, "dims": [2, 3], "suites": ["sandwich"]}"#).unwrap();
    assert_eq!(ok.selected_suites(), vec![Suite::Sandwich]);
}
